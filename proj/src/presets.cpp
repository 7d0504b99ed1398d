#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "presets_data.hpp"  // generated from configs/*.yaml

namespace peerfl {

std::optional<std::string> preset_yaml(const std::string& name) {
  for (const auto& p : kPresets)
    if (name == p.name) return std::string(p.yaml);
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

}  // namespace peerfl
