#include "net.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "error.hpp"

namespace peerfl {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double path_loss_db(double distance_m, double exponent, double ref_loss_db, double ref_dist) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("path loss requires a positive distance");
  if (!(ref_dist > 0.0)) throw std::invalid_argument("path loss requires a positive reference distance");
  if (distance_m < ref_dist) return ref_loss_db;
  return ref_loss_db + 10.0 * exponent * std::log10(distance_m / ref_dist);
}

double link_rate(const Position& device, const AccessPoint& ap, std::span<const RateTier> tiers,
                 double floor_rate, const PathLossModel& model) {
  const double d = std::max(distance(device, ap.position), model.ref_dist);
  const double loss = path_loss_db(d, model.exponent, model.ref_loss_db, model.ref_dist);
  for (const auto& tier : tiers) {
    if (tier.max_loss_db >= loss) return tier.rate_bps;
  }
  return floor_rate;
}

const AccessPoint& associate(const Position& device, std::span<const AccessPoint> aps) {
  if (aps.empty()) throw std::invalid_argument("associate requires at least one access point");
  const AccessPoint* best = &aps.front();
  double best_d = distance(device, best->position);
  for (const auto& ap : aps.subspan(1)) {
    const double d = distance(device, ap.position);
    if (d < best_d || (d == best_d && ap.id < best->id)) {
      best = &ap;
      best_d = d;
    }
  }
  return *best;
}

Position random_position(const Arena& arena, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, arena.width);
  std::uniform_real_distribution<double> uy(0.0, arena.height);
  const double x = ux(rng);
  const double y = uy(rng);
  return {x, y};
}

void update_positions(std::span<Position> positions, std::span<Position> waypoints, double dt,
                      double speed, const Arena& arena, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("mobility step requires dt > 0");
  if (speed < 0.0) throw std::invalid_argument("mobility speed must be non-negative");
  if (speed == 0.0) return;
  const double step = speed * dt;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Position& p = positions[i];
    const Position& w = waypoints[i];
    const double d = distance(p, w);
    if (d <= step) {
      p = w;
      waypoints[i] = random_position(arena, rng);
    } else {
      p.x += (w.x - p.x) * step / d;
      p.y += (w.y - p.y) * step / d;
    }
    p.x = std::clamp(p.x, 0.0, arena.width);
    p.y = std::clamp(p.y, 0.0, arena.height);
  }
}

// --- topology ---------------------------------------------------------------

void TopologyGraph::add_edge(NodeId a, NodeId b, double cap_bps) {
  if (a >= n_ || b >= n_) throw ConfigError("edge endpoint out of range");
  if (a == b) throw ConfigError("self-loop on node " + std::to_string(a));
  if (!(cap_bps > 0.0)) throw ConfigError("edge capacity must be positive");
  adj_[a * n_ + b] = adj_[b * n_ + a] = 1;
  cap_[a * n_ + b] = cap_[b * n_ + a] = cap_bps;
}

void TopologyGraph::set_edge_cap(NodeId a, NodeId b, double cap_bps) {
  if (!connected(a, b)) throw ConfigError("no edge between " + std::to_string(a) + " and " + std::to_string(b));
  if (!(cap_bps > 0.0)) throw ConfigError("edge capacity must be positive");
  cap_[a * n_ + b] = cap_[b * n_ + a] = cap_bps;
}

std::vector<NodeId> TopologyGraph::neighbors(NodeId a) const {
  std::vector<NodeId> out;
  for (NodeId b = 0; b < n_; ++b)
    if (adj_[a * n_ + b]) out.push_back(b);
  return out;
}

std::size_t TopologyGraph::degree(NodeId a) const {
  return static_cast<std::size_t>(std::count(adj_.begin() + a * n_, adj_.begin() + (a + 1) * n_, 1));
}

std::size_t TopologyGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), 1)) / 2;
}

std::vector<std::pair<NodeId, NodeId>> TopologyGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId a = 0; a < n_; ++a)
    for (NodeId b = a + 1; b < n_; ++b)
      if (connected(a, b)) out.emplace_back(a, b);
  return out;
}

std::optional<std::pair<NodeId, NodeId>> TopologyGraph::find_unreachable_pair() const {
  if (n_ <= 1) return std::nullopt;
  const auto dist = bfs_distances(*this, 0);
  for (NodeId v = 1; v < n_; ++v)
    if (dist[v] < 0) return std::make_pair(NodeId{0}, v);
  return std::nullopt;
}

TopologyGraph TopologyGraph::line(std::size_t n, double cap) {
  TopologyGraph g(n);
  for (NodeId i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, cap);
  return g;
}

TopologyGraph TopologyGraph::ring(std::size_t n, double cap) {
  TopologyGraph g = line(n, cap);
  if (n >= 3) g.add_edge(static_cast<NodeId>(n - 1), 0, cap);
  return g;
}

TopologyGraph TopologyGraph::star(std::size_t n, double cap, NodeId center) {
  TopologyGraph g(n);
  for (NodeId i = 0; i < n; ++i)
    if (i != center) g.add_edge(center, i, cap);
  return g;
}

TopologyGraph TopologyGraph::complete(std::size_t n, double cap) {
  TopologyGraph g(n);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) g.add_edge(a, b, cap);
  return g;
}

TopologyGraph TopologyGraph::random_regular(std::size_t n, std::size_t degree, double cap, Rng& rng) {
  if (degree == 0 || degree >= n) {
    throw ConfigError("random_regular degree must be in [1, n-1], got " + std::to_string(degree));
  }
  if ((n * degree) % 2 != 0) {
    throw ConfigError("random_regular requires n*degree to be even (n=" + std::to_string(n) +
                      ", degree=" + std::to_string(degree) + ")");
  }
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    TopologyGraph g(n);
    std::vector<NodeId> stubs;
    stubs.reserve(n * degree);
    for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), degree, v);

    auto take = [&](std::size_t i, std::size_t j) {
      g.add_edge(stubs[i], stubs[j], cap);
      if (i < j) std::swap(i, j);
      stubs[i] = stubs.back();
      stubs.pop_back();
      stubs[j] = stubs.back();
      stubs.pop_back();
    };

    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
      bool placed = false;
      for (int tries = 0; tries < 64 && !placed; ++tries) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (stubs[i] != stubs[j] && !g.connected(stubs[i], stubs[j])) {
          take(i, j);
          placed = true;
        }
      }
      if (placed) continue;
      stuck = true;
      for (std::size_t i = 0; i < stubs.size() && stuck; ++i)
        for (std::size_t j = i + 1; j < stubs.size(); ++j)
          if (stubs[i] != stubs[j] && !g.connected(stubs[i], stubs[j])) {
            take(i, j);
            stuck = false;
            break;
          }
    }
    if (!stuck && !g.find_unreachable_pair()) return g;
  }
  throw ConfigError("could not generate a connected random_regular graph (n=" + std::to_string(n) +
                    ", degree=" + std::to_string(degree) + ")");
}

TopologyGraph TopologyGraph::from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges,
                                        double cap) {
  TopologyGraph g(n);
  for (const auto& [a, b] : edges) g.add_edge(a, b, cap);
  return g;
}

// --- routing ----------------------------------------------------------------

std::vector<int> bfs_distances(const TopologyGraph& graph, NodeId dst) {
  const std::size_t n = graph.size();
  std::vector<int> dist(n, -1);
  std::deque<NodeId> frontier{dst};
  dist[dst] = 0;
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v = 0; v < n; ++v) {
      if (graph.connected(u, v) && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

namespace {

// Greedy walk down the distance field: the smallest-index neighbor one hop
// closer gives the lexicographically smallest shortest path.
std::vector<NodeId> walk(NodeId src, NodeId dst, const TopologyGraph& graph, const std::vector<int>& dist) {
  if (dist[src] < 0) throw UnroutableError(static_cast<int>(src), static_cast<int>(dst));
  std::vector<NodeId> path{src};
  NodeId u = src;
  while (u != dst) {
    for (NodeId v = 0; v < graph.size(); ++v) {
      if (graph.connected(u, v) && dist[v] == dist[u] - 1) {
        u = v;
        break;
      }
    }
    path.push_back(u);
  }
  return path;
}

void check_endpoints(NodeId src, NodeId dst, const TopologyGraph& graph) {
  if (src >= graph.size() || dst >= graph.size()) throw std::invalid_argument("route endpoint out of range");
  if (src == dst) throw std::invalid_argument("route requires distinct endpoints");
}

}  // namespace

std::vector<NodeId> route(NodeId src, NodeId dst, const TopologyGraph& graph) {
  check_endpoints(src, dst, graph);
  return walk(src, dst, graph, bfs_distances(graph, dst));
}

const std::vector<int>& RoutingTable::distances_to(NodeId dst) {
  auto& d = dist_[dst];
  if (d.empty()) d = bfs_distances(*graph_, dst);
  return d;
}

std::vector<NodeId> RoutingTable::route(NodeId src, NodeId dst) {
  check_endpoints(src, dst, *graph_);
  return walk(src, dst, *graph_, distances_to(dst));
}

int RoutingTable::hops(NodeId src, NodeId dst) { return distances_to(dst)[src]; }

// --- transfer ---------------------------------------------------------------

double hop_time(std::uint64_t size_bits, const ChannelState& hop, LossMode mode, std::uint64_t mtu_bits,
                Rng& rng) {
  if (!(hop.data_rate > 0.0)) throw std::invalid_argument("hop rate must be positive");
  if (!(hop.loss_prob >= 0.0 && hop.loss_prob < 1.0)) throw std::invalid_argument("loss probability must be in [0,1)");
  const double bits = static_cast<double>(size_bits);
  if (hop.loss_prob == 0.0) return bits / hop.data_rate + hop.delay;
  if (mode == LossMode::Expected) return bits / hop.data_rate / (1.0 - hop.loss_prob) + hop.delay;

  if (mtu_bits == 0) throw std::invalid_argument("MTU must be positive");
  const std::uint64_t packets = (size_bits + mtu_bits - 1) / mtu_bits;
  const std::uint64_t last = size_bits - (packets - 1) * mtu_bits;
  std::geometric_distribution<std::uint64_t> failures(1.0 - hop.loss_prob);
  double sent = 0.0;
  for (std::uint64_t k = 0; k < packets; ++k) {
    const double pkt = static_cast<double>(k + 1 == packets ? last : mtu_bits);
    sent += pkt * static_cast<double>(1 + failures(rng));
  }
  return sent / hop.data_rate + hop.delay;
}

double transfer_time(std::uint64_t size_bits, std::span<const ChannelState> hops, LossMode mode,
                     std::uint64_t mtu_bits, Rng& rng) {
  double total = 0.0;
  for (const auto& hop : hops) total += hop_time(size_bits, hop, mode, mtu_bits, rng);
  return total;
}

double transfer_time(const Message& msg, std::span<const NodeId> path, std::span<const ChannelState> hops,
                     LossMode mode, std::uint64_t mtu_bits, Rng& rng) {
  if (path.size() < 2 || path.front() != msg.src || path.back() != msg.dst)
    throw std::invalid_argument("path must run from message source to destination");
  if (hops.size() != path.size() - 1) throw std::invalid_argument("one channel state per hop required");
  return transfer_time(msg.size_bits, hops, mode, mtu_bits, rng);
}

}  // namespace peerfl
