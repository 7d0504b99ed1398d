#pragma once

#include <stdexcept>
#include <string>

namespace peerfl {

/// Invalid or inconsistent configuration detected before any event runs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure while the simulation is running (numeric blow-up, kernel misuse).
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public SimulationError {
 public:
  NumericError(const std::string& msg, int layer)
      : SimulationError(msg + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

/// Malformed serialized weights or data files.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

class UnroutableError : public ConfigError {
 public:
  UnroutableError(int src, int dst)
      : ConfigError("no route between nodes " + std::to_string(src) + " and " + std::to_string(dst)),
        src_(src), dst_(dst) {}
  int src() const { return src_; }
  int dst() const { return dst_; }

 private:
  int src_, dst_;
};

}  // namespace peerfl
