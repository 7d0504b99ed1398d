#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kernel.hpp"
#include "rng.hpp"

namespace peerfl {

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

struct Arena {
  double width = 100.0;
  double height = 100.0;
  bool contains(const Position& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  friend bool operator==(const Arena&, const Arena&) = default;
};

struct AccessPoint {
  int id = 0;
  Position position;
  double backbone_rate = 1e9;  // bits/s
  friend bool operator==(const AccessPoint&, const AccessPoint&) = default;
};

struct ChannelState {
  double data_rate = 0.0;  // bits/s
  double delay = 0.0;      // s
  double loss_prob = 0.0;  // per packet, [0,1)
};

enum class ChannelMode { Ideal, Wireless };
enum class LossMode { Expected, Stochastic };

struct RateTier {
  double max_loss_db = 0.0;
  double rate_bps = 0.0;
  friend bool operator==(const RateTier&, const RateTier&) = default;
};

struct PathLossModel {
  double exponent = 3.0;
  double ref_loss_db = 40.0;
  double ref_dist = 1.0;
  friend bool operator==(const PathLossModel&, const PathLossModel&) = default;
};

/// Log-distance path loss; distances below ref_dist are clamped to ref_loss_db.
/// Throws std::invalid_argument for non-positive distance or reference distance.
double path_loss_db(double distance_m, double exponent, double ref_loss_db, double ref_dist);

/// Rate of the first tier whose max_loss_db covers the loss to `ap`, or
/// `floor_rate` beyond the last tier. A co-located device sees ref_loss_db.
double link_rate(const Position& device, const AccessPoint& ap, std::span<const RateTier> tiers,
                 double floor_rate, const PathLossModel& model = {});

/// Nearest access point; ties go to the lowest id. `aps` must be non-empty.
const AccessPoint& associate(const Position& device, std::span<const AccessPoint> aps);

/// Random-waypoint step. Each device moves speed*dt toward its waypoint
/// without overshooting; on arrival a fresh waypoint is drawn uniformly in
/// the arena.
void update_positions(std::span<Position> positions, std::span<Position> waypoints, double dt,
                      double speed, const Arena& arena, Rng& rng);

Position random_position(const Arena& arena, Rng& rng);

/// Undirected P2P overlay with per-edge bandwidth caps.
class TopologyGraph {
 public:
  TopologyGraph() = default;
  explicit TopologyGraph(std::size_t n) : n_(n), adj_(n * n, 0), cap_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  void add_edge(NodeId a, NodeId b, double cap_bps);
  bool connected(NodeId a, NodeId b) const { return adj_[a * n_ + b] != 0; }
  double edge_cap(NodeId a, NodeId b) const { return cap_[a * n_ + b]; }
  void set_edge_cap(NodeId a, NodeId b, double cap_bps);
  std::vector<NodeId> neighbors(NodeId a) const;  // ascending
  std::size_t degree(NodeId a) const;
  std::size_t edge_count() const;
  std::vector<std::pair<NodeId, NodeId>> edges() const;  // a < b, lexicographic

  /// First (src, dst) pair, in index order, with no path; nullopt when connected.
  std::optional<std::pair<NodeId, NodeId>> find_unreachable_pair() const;

  static TopologyGraph line(std::size_t n, double cap);
  static TopologyGraph ring(std::size_t n, double cap);
  static TopologyGraph star(std::size_t n, double cap, NodeId center = 0);
  static TopologyGraph complete(std::size_t n, double cap);
  /// Connected simple graph with every node at exactly `degree` neighbors.
  /// Requires n*degree even and degree < n. Throws ConfigError otherwise.
  static TopologyGraph random_regular(std::size_t n, std::size_t degree, double cap, Rng& rng);
  static TopologyGraph from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges,
                                  double cap);

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<double> cap_;
};

/// Hop distances from every node to `dst` (-1 when unreachable).
std::vector<int> bfs_distances(const TopologyGraph& graph, NodeId dst);

/// Minimal-hop path src..dst, lexicographically smallest among ties.
/// Throws UnroutableError when no path exists.
std::vector<NodeId> route(NodeId src, NodeId dst, const TopologyGraph& graph);

/// Caches BFS trees per destination; valid while the graph is unchanged.
class RoutingTable {
 public:
  explicit RoutingTable(const TopologyGraph& graph) : graph_(&graph), dist_(graph.size()) {}
  std::vector<NodeId> route(NodeId src, NodeId dst);
  int hops(NodeId src, NodeId dst);

 private:
  const std::vector<int>& distances_to(NodeId dst);
  const TopologyGraph* graph_;
  std::vector<std::vector<int>> dist_;
};

struct Message {
  std::uint64_t id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  int round = 0;
  std::uint64_t size_bits = 0;
  std::vector<std::uint8_t> payload;
  SimTime created_at;
};

inline constexpr std::uint64_t kDefaultMtuBits = 12000;

/// Serialization plus propagation time of one store-and-forward hop.
/// Expected mode inflates serialization by 1/(1-p); Stochastic mode splits
/// the message into MTU packets and retransmits each lost packet.
double hop_time(std::uint64_t size_bits, const ChannelState& hop, LossMode mode,
                std::uint64_t mtu_bits, Rng& rng);

/// Sum of hop_time over the hops of a route.
double transfer_time(std::uint64_t size_bits, std::span<const ChannelState> hops, LossMode mode,
                     std::uint64_t mtu_bits, Rng& rng);

/// Checks that `path` runs from msg.src to msg.dst with one channel per hop.
double transfer_time(const Message& msg, std::span<const NodeId> path,
                     std::span<const ChannelState> hops, LossMode mode, std::uint64_t mtu_bits,
                     Rng& rng);

}  // namespace peerfl
