#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adversary.hpp"
#include "learning.hpp"
#include "net.hpp"

namespace peerfl {

enum class RunMode { Centralized, P2P };
enum class DataSource { Synthetic, Csv };
enum class PartitionKind { Iid, Dirichlet };
enum class TopologyKind { Explicit, Line, Ring, Star, Complete, RandomRegular };
enum class AggregationKind { PeerAverage, WeightedAverage, GossipPush };
enum class EarlyStopMetric { Loss, Accuracy };

using Edge = std::pair<NodeId, NodeId>;

struct DeviceProfile {
  double speed_factor = 1.0;
  int ram_mb = 1024;
  double bandwidth_cap = 1e8;  // bits/s, both directions
  bool has_accelerator = false;
  AdversarySpec adversary;
  std::optional<Position> position;  // initial position in wireless mode

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

struct DataSpec {
  DataSource source = DataSource::Synthetic;
  std::size_t rows = 1000;
  std::size_t features = 8;
  int classes = 3;
  double separation = 3.0;
  std::string path;
  std::string label_column = "label";
  double test_fraction = 0.2;

  friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

struct PartitionSpec {
  PartitionKind kind = PartitionKind::Iid;
  double alpha = 0.5;
  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

struct TopologySpec {
  TopologyKind kind = TopologyKind::Ring;
  std::size_t degree = 3;  // random_regular
  NodeId center = 0;       // star
  std::vector<Edge> edges; // explicit
  std::optional<std::pair<double, double>> edge_cap_range;
  friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

struct AggregationSpec {
  AggregationKind kind = AggregationKind::PeerAverage;
  int fanout = 1;                // gossip_push
  std::vector<Edge> send_edges;  // directed; empty means "all overlay neighbors"
  friend bool operator==(const AggregationSpec&, const AggregationSpec&) = default;
};

struct ChannelSpec {
  ChannelMode mode = ChannelMode::Ideal;
  double rate = 1e8;  // default overlay edge capacity, bits/s
  double delay = 0.01;
  double loss = 0.0;
  LossMode loss_mode = LossMode::Expected;
  std::uint64_t mtu = kDefaultMtuBits;
  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct WirelessSpec {
  Arena arena;
  std::vector<AccessPoint> access_points;
  std::vector<RateTier> tiers{{60.0, 54e6}, {80.0, 6e6}};
  double floor_rate = 1e6;
  PathLossModel path_loss;
  double speed = 1.0;  // m/s
  double tick = 1.0;   // s
  friend bool operator==(const WirelessSpec&, const WirelessSpec&) = default;
};

struct EarlyStopConfig {
  bool enabled = false;
  int patience = 3;
  double min_delta = 0.0;
  EarlyStopMetric metric = EarlyStopMetric::Loss;
  friend bool operator==(const EarlyStopConfig&, const EarlyStopConfig&) = default;
};

struct TimingSpec {
  double base_seconds_per_row = 0.0005;
  double accelerator_speedup = 10.0;
  int rows_per_mb = 64;
  friend bool operator==(const TimingSpec&, const TimingSpec&) = default;
};

struct SimConfig {
  std::int64_t seed = 0;
  RunMode mode = RunMode::P2P;
  NodeId aggregator = 0;
  int rounds = 5;
  int epochs_per_round = 1;
  int batch_size = 32;
  double learning_rate = 0.1;
  double validation_fraction = 0.2;
  double horizon = 1e9;
  Compression compression = Compression::None;
  std::vector<int> hidden;                // hidden layer widths
  std::optional<std::vector<int>> layer_dims;  // explicit full shape
  DataSpec data;
  PartitionSpec partition;
  std::vector<DeviceProfile> devices;
  TopologySpec topology;
  AggregationSpec aggregation;
  ChannelSpec channel;
  WirelessSpec wireless;
  EarlyStopConfig early_stop;
  TimingSpec timing;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Parses the YAML subset (maps, sequences, scalars; no anchors, aliases,
/// tags, or multiple documents). Unknown keys are rejected. Throws
/// ConfigError with a line number or the offending key path.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

/// Canonical YAML; parse_config(render_config(c)) == c.
std::string render_config(const SimConfig& cfg);

/// Every violation found, as "path: message". Empty means runnable.
std::vector<std::string> validate(const SimConfig& cfg);

/// Documented example configurations: line3, star10, scale100.
std::optional<std::string> preset_yaml(const std::string& name);
std::vector<std::string> preset_names();

std::string to_string(RunMode m);
std::string to_string(TopologyKind k);
std::string to_string(AggregationKind k);

}  // namespace peerfl
