#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kernel.hpp"

namespace peerfl {

enum class RecordEvent { Train, Receive, Send, Eval, Drop, Warn, Observe };

std::string to_string(RecordEvent e);

/// One row of simulation output. `duration` is the compute time of a Train
/// row and the end-to-end transfer time of a Receive row, 0 otherwise.
struct MetricsRecord {
  int round = 0;
  NodeId device = 0;
  RecordEvent event = RecordEvent::Eval;
  double sim_time = 0.0;
  std::optional<double> loss;
  std::optional<double> accuracy;
  std::optional<double> adv_accuracy;
  std::uint64_t bytes = 0;
  std::optional<NodeId> peer;
  double duration = 0.0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

using MetricsLog = std::vector<MetricsRecord>;

enum class MetricsFormat { Csv, Jsonl };

inline constexpr const char* kCsvHeader = "round,device,event,sim_time,loss,accuracy,adv_accuracy,bytes,peer,duration";

void write_metrics(const MetricsLog& log, std::ostream& out, MetricsFormat format);
/// Throws std::runtime_error when the file cannot be written.
void write_metrics(const MetricsLog& log, const std::string& path, MetricsFormat format);
std::string format_metrics(const MetricsLog& log, MetricsFormat format);

struct RoundSplit {
  int round = 0;
  double comm_time = 0.0;
  double compute_time = 0.0;
};

struct Summary {
  std::size_t devices = 0;
  int rounds = 0;                    // highest round seen
  double final_mean_accuracy = 0.0;  // mean over devices of their last Eval
  std::optional<double> final_mean_adv_accuracy;
  double total_sim_time = 0.0;
  std::uint64_t total_bytes = 0;     // sum over Send rows
  std::uint64_t messages = 0;
  std::uint64_t drops = 0;
  std::uint64_t warnings = 0;
  double comm_time = 0.0;            // sum of transfer durations
  double compute_time = 0.0;         // sum of training durations
  double busy_time() const { return comm_time + compute_time; }
  std::vector<RoundSplit> per_round;
};

Summary summarize(const MetricsLog& log);

std::string summary_json(const Summary& s);

}  // namespace peerfl
