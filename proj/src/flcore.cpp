#include "flcore.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "error.hpp"
#include "log.hpp"
#include "scenario.hpp"

namespace peerfl {

ModelParams aggregate(const ModelParams& local, std::span<const ModelParams> received,
                      std::span<const double> weights) {
  for (const auto& r : received) {
    if (r.shape != local.shape || r.weights.size() != local.weights.size())
      throw std::invalid_argument("cannot aggregate models of different shapes");
  }
  if (received.empty()) return local;
  if (!weights.empty() && weights.size() != received.size() + 1)
    throw std::invalid_argument("aggregation weights must cover the local and every received model");

  double total = 0.0;
  std::vector<double> w(received.size() + 1, 1.0);
  if (!weights.empty()) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
        throw std::invalid_argument("aggregation weights must be finite and non-negative");
      w[i] = weights[i];
    }
  }
  for (double x : w) total += x;
  if (!(total > 0.0)) throw std::invalid_argument("aggregation weights must sum to a positive value");

  // mean = local + sum_i w_i (x_i - local) / W. Per coordinate the terms are
  // summed in sorted order so the result is independent of arrival order,
  // and identical inputs contribute exact zeros.
  ModelParams out = local;
  std::vector<double> terms(received.size());
  for (std::size_t c = 0; c < local.weights.size(); ++c) {
    const double base = local.weights[c];
    for (std::size_t i = 0; i < received.size(); ++i) terms[i] = w[i + 1] * (received[i].weights[c] - base);
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    out.weights[c] = base + sum / total;
  }
  return out;
}

double compute_time(const DeviceProfile& device, std::size_t shard_rows, int epochs, const TimingSpec& timing) {
  double t = timing.base_seconds_per_row * static_cast<double>(shard_rows) * static_cast<double>(epochs) /
             device.speed_factor;
  if (device.has_accelerator) t /= timing.accelerator_speedup;
  return t;
}

BatchDecision effective_batch(const DeviceProfile& device, int requested, int rows_per_mb) {
  if (requested < 1) throw std::invalid_argument("requested batch size must be at least 1");
  const long long cap = static_cast<long long>(device.ram_mb) * static_cast<long long>(rows_per_mb);
  const long long batch = std::max(1LL, std::min(static_cast<long long>(requested), cap));
  return {static_cast<int>(batch), batch < requested};
}

std::vector<NodeId> gossip_select(std::span<const NodeId> peers, int fanout, Rng& rng) {
  std::vector<NodeId> pool(peers.begin(), peers.end());
  const std::size_t k = std::min(pool.size(), static_cast<std::size_t>(std::max(fanout, 0)));
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool early_stop(std::span<const double> history, const EarlyStopConfig& cfg) {
  if (history.empty() || cfg.patience < 1) return false;
  const double sign = cfg.metric == EarlyStopMetric::Loss ? 1.0 : -1.0;
  // Work in "lower is better" units.
  double best = sign * history.front();
  int stale = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const double v = sign * history[i];
    if (v < best - cfg.min_delta) {
      stale = 0;
      best = v;
    } else if (v < best) {
      best = v;
    } else {
      ++stale;
    }
  }
  return stale >= cfg.patience;
}

std::uint64_t init_seed(std::uint64_t run_seed, NodeId id) { return derive_seed(run_seed, Stream::ModelInit, {id}); }

std::uint64_t train_seed(std::uint64_t run_seed, NodeId id, int round) {
  return derive_seed(run_seed, Stream::Training, {id, static_cast<std::uint64_t>(round)});
}

TrainResult train_session(const ModelParams& model, const Dataset& data, int epochs, int batch_size,
                          double learning_rate, std::uint64_t seed) {
  if (epochs <= 0) return TrainResult{model, evaluate(model, data)};
  return train(model, data, TrainConfig{epochs, batch_size, learning_rate, seed});
}

namespace {

ModelParams pre_send(const ModelParams& model, const AdversarySpec& spec, Rng& rng) {
  if (active_phase(spec.kind) == AdversaryPhase::PreSend) return poison_update(model, spec, rng);
  return model;
}

struct Inbound {
  NodeId from = 0;
  std::optional<ModelParams> params;  // nullopt when the payload was dropped
};

// Received models sorted by sender, with their aggregation weights.
ModelParams average_inbound(const ModelParams& local, NodeId self, std::vector<Inbound> inbound,
                            AggregationKind kind, std::span<const std::size_t> shard_rows) {
  std::sort(inbound.begin(), inbound.end(), [](const Inbound& a, const Inbound& b) { return a.from < b.from; });
  std::vector<ModelParams> models;
  std::vector<double> weights{kind == AggregationKind::WeightedAverage ? static_cast<double>(shard_rows[self]) : 1.0};
  for (auto& in : inbound) {
    if (!in.params) continue;
    weights.push_back(kind == AggregationKind::WeightedAverage ? static_cast<double>(shard_rows[in.from]) : 1.0);
    models.push_back(std::move(*in.params));
  }
  return aggregate(local, models, weights);
}

}  // namespace

ReceiveOutcome on_receive(DeviceState& device, std::span<const Message> inbox, const ReceiveContext& ctx,
                          Rng& adversary_rng) {
  for (const auto& msg : inbox)
    if (msg.dst != device.id) throw std::invalid_argument("message addressed to another device");
  if (!device.model) device.model = init_model(ctx.shape, init_seed(ctx.seed, device.id));

  ReceiveOutcome out;
  std::vector<Inbound> inbound;
  for (const auto& msg : inbox) {
    Inbound in{msg.src, std::nullopt};
    try {
      in.params = deserialize(msg.payload, ctx.shape, ctx.compression);
    } catch (const FormatError&) {
      out.dropped.push_back(msg.src);
    }
    inbound.push_back(std::move(in));
  }
  device.model = average_inbound(*device.model, device.id, std::move(inbound), ctx.aggregation, ctx.shard_rows);
  out.validation = evaluate(*device.model, device.validation);
  device.history.push_back(out.validation);

  const TrainResult trained = train_session(*device.model, device.shard, ctx.epochs, ctx.batch_size,
                                            ctx.learning_rate, train_seed(ctx.seed, device.id, ctx.round));
  device.model = trained.params;
  out.training = trained.metrics;
  out.compute_seconds = ctx.epochs > 0 ? compute_time(device.profile, device.shard.rows, ctx.epochs, ctx.timing) : 0.0;

  for (NodeId to : ctx.targets) {
    Message msg;
    msg.src = device.id;
    msg.dst = to;
    msg.round = ctx.round;
    msg.payload = serialize(pre_send(*device.model, device.profile.adversary, adversary_rng), ctx.compression);
    msg.size_bits = 8 * static_cast<std::uint64_t>(msg.payload.size());
    msg.created_at = ctx.now + out.compute_seconds;
    out.outgoing.push_back(std::move(msg));
  }
  return out;
}

// --- event-driven run ---------------------------------------------------------

namespace {

enum class Phase { Idle, Training, Waiting, Done };

struct Runtime {
  Phase phase = Phase::Idle;
  int round = 0;
  std::optional<TrainResult> pending;
  double pending_seconds = 0.0;
  std::map<int, std::vector<Inbound>> inbox;
  int batch = 1;
  Rng adversary_rng;
};

struct Flight {
  Message msg;
  std::vector<NodeId> path;
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, const SimObserver& observer);
  SimResult run();

 private:
  void handle(const SimEvent& ev);
  void start_round(NodeId id, int round);
  void train_done(NodeId id, int round);
  void hop_arrive(const HopArrive& hop);
  void mobility_tick();
  void stop_check();

  void send(NodeId from, NodeId to, int round, const ModelParams& model);
  void schedule_hop(std::uint64_t msg_id, std::size_t next_hop);
  void deliver(Flight flight);
  void try_exchange(NodeId id);
  void finish_exchange(NodeId id, int round);
  ChannelState hop_channel(NodeId u, NodeId v) const;
  double radio_rate(NodeId id) const;

  const std::vector<NodeId>& out_peers(NodeId id, int round);
  std::size_t in_count(NodeId id, int round);

  void record(MetricsRecord r);
  double now() const { return kernel_.now().seconds; }

  const SimConfig& cfg_;
  const SimObserver& observer_;
  std::uint64_t seed_;
  int sessions_;
  DataBundle data_;
  TopologyGraph graph_;
  RoutingTable routes_;
  std::vector<DeviceState> devices_;
  std::vector<Runtime> rt_;
  std::vector<std::size_t> shard_rows_;
  std::vector<Position> waypoints_;
  std::size_t active_ = 0;

  // Static send graph (ordered mode) or per-round gossip draws.
  std::vector<std::vector<NodeId>> static_out_;
  std::vector<std::size_t> static_in_;
  std::map<int, std::vector<std::vector<NodeId>>> gossip_out_;
  std::map<int, std::vector<std::size_t>> gossip_in_;

  std::unordered_map<std::uint64_t, Flight> flights_;
  std::uint64_t next_msg_ = 0;
  Rng channel_rng_;
  Rng mobility_rng_;

  std::map<int, std::pair<double, std::size_t>> round_reports_;
  std::vector<double> daemon_history_;

  Kernel kernel_;
  StopSignal stop_{false};
  bool stopped_early_ = false;
  MetricsLog log_;
};

Simulation::Simulation(const SimConfig& cfg, const SimObserver& observer)
    : cfg_(cfg),
      observer_(observer),
      seed_(static_cast<std::uint64_t>(cfg.seed)),
      sessions_(std::max(cfg.rounds, 1)),
      data_(build_datasets(cfg)),
      graph_(build_topology(cfg)),
      routes_(graph_),
      channel_rng_(make_rng(seed_, Stream::Channel)),
      mobility_rng_(make_rng(seed_, Stream::Mobility)) {
  const std::size_t n = cfg.devices.size();
  const bool wireless = cfg.channel.mode == ChannelMode::Wireless;
  for (NodeId i = 0; i < n; ++i) {
    DeviceState d;
    d.id = i;
    d.profile = cfg.devices[i];
    d.shard = std::move(data_.train[i]);
    d.validation = std::move(data_.validation[i]);
    if (wireless) d.position = d.profile.position ? *d.profile.position : random_position(cfg.wireless.arena, mobility_rng_);
    shard_rows_.push_back(d.shard.rows);
    devices_.push_back(std::move(d));

    Runtime r;
    r.adversary_rng = make_rng(seed_, Stream::Adversary, {i});
    const auto batch = effective_batch(cfg.devices[i], cfg.batch_size, cfg.timing.rows_per_mb);
    r.batch = batch.batch;
    if (batch.clamped) {
      record({0, i, RecordEvent::Warn, 0.0, {}, {}, {}, 0, {}, 0.0});
      log_debug("device " + std::to_string(i) + ": batch clamped to " + std::to_string(batch.batch) + " by RAM");
    }
    rt_.push_back(std::move(r));
  }
  if (wireless)
    for (NodeId i = 0; i < n; ++i) waypoints_.push_back(random_position(cfg.wireless.arena, mobility_rng_));

  if (cfg.mode == RunMode::P2P && cfg.aggregation.kind != AggregationKind::GossipPush) {
    static_out_.resize(n);
    static_in_.assign(n, 0);
    if (cfg.aggregation.send_edges.empty()) {
      for (NodeId i = 0; i < n; ++i) static_out_[i] = graph_.neighbors(i);
    } else {
      for (const auto& [a, b] : cfg.aggregation.send_edges) static_out_[a].push_back(b);
      for (auto& out : static_out_) {
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
      }
    }
    for (const auto& out : static_out_)
      for (NodeId to : out) ++static_in_[to];
  }
  kernel_.set_handler([this](const SimEvent& ev) { handle(ev); });
}

void Simulation::record(MetricsRecord r) { log_.push_back(std::move(r)); }

const std::vector<NodeId>& Simulation::out_peers(NodeId id, int round) {
  if (cfg_.aggregation.kind != AggregationKind::GossipPush) return static_out_[id];
  auto it = gossip_out_.find(round);
  if (it == gossip_out_.end()) {
    const std::size_t n = devices_.size();
    std::vector<std::vector<NodeId>> outs(n);
    std::vector<std::size_t> ins(n, 0);
    for (NodeId j = 0; j < n; ++j) {
      Rng rng = make_rng(seed_, Stream::Gossip, {j, static_cast<std::uint64_t>(round)});
      const auto peers = graph_.neighbors(j);
      outs[j] = gossip_select(peers, cfg_.aggregation.fanout, rng);
      for (NodeId to : outs[j]) ++ins[to];
    }
    gossip_in_[round] = std::move(ins);
    it = gossip_out_.emplace(round, std::move(outs)).first;
  }
  return it->second[id];
}

std::size_t Simulation::in_count(NodeId id, int round) {
  if (cfg_.aggregation.kind != AggregationKind::GossipPush) return static_in_[id];
  out_peers(id, round);
  return gossip_in_[round][id];
}

double Simulation::radio_rate(NodeId id) const {
  const auto& w = cfg_.wireless;
  const auto& pos = devices_[id].position;
  const AccessPoint& ap = associate(pos, w.access_points);
  return std::min(link_rate(pos, ap, w.tiers, w.floor_rate, w.path_loss), ap.backbone_rate);
}

ChannelState Simulation::hop_channel(NodeId u, NodeId v) const {
  double rate = std::min({graph_.edge_cap(u, v), devices_[u].profile.bandwidth_cap, devices_[v].profile.bandwidth_cap});
  if (cfg_.channel.mode == ChannelMode::Wireless) rate = std::min({rate, radio_rate(u), radio_rate(v)});
  return ChannelState{rate, cfg_.channel.delay, cfg_.channel.loss};
}

SimResult Simulation::run() {
  const std::size_t n = devices_.size();
  active_ = n;
  for (NodeId i = 0; i < n; ++i) kernel_.schedule(SimTime(0.0), i, RoundStart{1});
  if (cfg_.channel.mode == ChannelMode::Wireless && cfg_.wireless.speed > 0.0)
    kernel_.schedule(SimTime(cfg_.wireless.tick), 0, MobilityTick{});

  kernel_.run_until(SimTime(cfg_.horizon), stop_);

  SimResult out;
  out.log = std::move(log_);
  for (auto& d : devices_) {
    out.final_models.push_back(d.model ? *d.model : init_model(data_.shape, init_seed(seed_, d.id)));
    out.validation_history.push_back(d.history);
  }
  out.daemon_history = daemon_history_;
  out.end_time = kernel_.now();
  out.stopped_early = stopped_early_;
  out.events = kernel_.processed();
  return out;
}

void Simulation::handle(const SimEvent& ev) {
  if (observer_.on_event) observer_.on_event(ev);
  switch (ev.kind()) {
    case EventKind::RoundStart: start_round(ev.target, std::get<RoundStart>(ev.payload).round); break;
    case EventKind::TrainDone: train_done(ev.target, std::get<TrainDone>(ev.payload).round); break;
    case EventKind::HopArrive: hop_arrive(std::get<HopArrive>(ev.payload)); break;
    case EventKind::MobilityTick: mobility_tick(); break;
    case EventKind::StopCheck: stop_check(); break;
  }
}

void Simulation::start_round(NodeId id, int round) {
  auto& d = devices_[id];
  auto& r = rt_[id];
  if (!d.model) d.model = init_model(data_.shape, init_seed(seed_, id));
  r.phase = Phase::Training;
  r.round = round;
  r.pending = train_session(*d.model, d.shard, cfg_.epochs_per_round, r.batch, cfg_.learning_rate,
                            train_seed(seed_, id, round));
  r.pending_seconds =
      cfg_.epochs_per_round > 0 ? compute_time(d.profile, d.shard.rows, cfg_.epochs_per_round, cfg_.timing) : 0.0;
  kernel_.schedule(kernel_.now() + r.pending_seconds, id, TrainDone{round});
}

void Simulation::train_done(NodeId id, int round) {
  auto& d = devices_[id];
  auto& r = rt_[id];
  d.model = std::move(r.pending->params);
  const EvalMetrics m = r.pending->metrics;
  r.pending.reset();
  record({round, id, RecordEvent::Train, now(), m.loss, m.accuracy, {}, 0, {}, r.pending_seconds});

  if (round > cfg_.rounds) {  // rounds == 0: local training only
    finish_exchange(id, round);
    return;
  }
  r.phase = Phase::Waiting;
  if (cfg_.mode == RunMode::P2P) {
    for (NodeId to : out_peers(id, round)) send(id, to, round, *d.model);
  } else if (id != cfg_.aggregator) {
    send(id, cfg_.aggregator, round, *d.model);
  }
  try_exchange(id);
}

void Simulation::send(NodeId from, NodeId to, int round, const ModelParams& model) {
  auto& r = rt_[from];
  Flight f;
  f.msg.id = next_msg_++;
  f.msg.src = from;
  f.msg.dst = to;
  f.msg.round = round;
  f.msg.payload = serialize(pre_send(model, devices_[from].profile.adversary, r.adversary_rng), cfg_.compression);
  f.msg.size_bits = 8 * static_cast<std::uint64_t>(f.msg.payload.size());
  f.msg.created_at = kernel_.now();
  f.path = routes_.route(from, to);
  record({round, from, RecordEvent::Send, now(), {}, {}, {}, f.msg.payload.size(), to, 0.0});
  const auto id = f.msg.id;
  flights_.emplace(id, std::move(f));
  schedule_hop(id, 1);
}

void Simulation::schedule_hop(std::uint64_t msg_id, std::size_t next_hop) {
  const Flight& f = flights_.at(msg_id);
  const NodeId u = f.path[next_hop - 1], v = f.path[next_hop];
  const double dt = hop_time(f.msg.size_bits, hop_channel(u, v), cfg_.channel.loss_mode, cfg_.channel.mtu, channel_rng_);
  kernel_.schedule(kernel_.now() + dt, v, HopArrive{msg_id, next_hop});
}

void Simulation::hop_arrive(const HopArrive& hop) {
  auto it = flights_.find(hop.message);
  if (hop.hop + 1 < it->second.path.size()) {
    schedule_hop(hop.message, hop.hop + 1);
    return;
  }
  Flight f = std::move(it->second);
  flights_.erase(it);
  deliver(std::move(f));
}

void Simulation::deliver(Flight f) {
  const Message& m = f.msg;
  const auto bytes = m.payload.size();
  record({m.round, m.dst, RecordEvent::Receive, now(), {}, {}, {}, bytes, m.src, now() - m.created_at.seconds});
  if (devices_[m.dst].profile.adversary.kind == AdversaryKind::HonestButCurious)
    record({m.round, m.dst, RecordEvent::Observe, now(), {}, {}, {}, bytes, m.src, 0.0});

  Inbound in{m.src, std::nullopt};
  try {
    in.params = deserialize(m.payload, data_.shape, cfg_.compression);
  } catch (const FormatError& e) {
    record({m.round, m.dst, RecordEvent::Drop, now(), {}, {}, {}, bytes, m.src, 0.0});
    log_warn("device " + std::to_string(m.dst) + " dropped a payload from " + std::to_string(m.src) + ": " + e.what());
  }
  rt_[m.dst].inbox[m.round].push_back(std::move(in));
  try_exchange(m.dst);
}

void Simulation::try_exchange(NodeId id) {
  auto& r = rt_[id];
  if (r.phase != Phase::Waiting) return;
  const int k = r.round;
  auto& inbox = r.inbox[k];
  auto& d = devices_[id];

  if (cfg_.mode == RunMode::P2P) {
    if (inbox.size() < in_count(id, k)) return;
    d.model = average_inbound(*d.model, id, std::move(inbox), cfg_.aggregation.kind, shard_rows_);
  } else if (id == cfg_.aggregator) {
    if (inbox.size() < devices_.size() - 1) return;
    d.model = average_inbound(*d.model, id, std::move(inbox), cfg_.aggregation.kind, shard_rows_);
    for (NodeId c = 0; c < devices_.size(); ++c)
      if (c != id) send(id, c, k, *d.model);
  } else {
    if (inbox.empty()) return;
    if (inbox.front().params) d.model = std::move(*inbox.front().params);
  }
  r.inbox.erase(k);
  if (observer_.on_exchange) observer_.on_exchange(id, k, *d.model);
  finish_exchange(id, k);
}

void Simulation::finish_exchange(NodeId id, int round) {
  auto& d = devices_[id];
  auto& r = rt_[id];
  const EvalMetrics test = evaluate(*d.model, data_.test);
  std::optional<double> adv;
  if (active_phase(d.profile.adversary.kind) == AdversaryPhase::Eval)
    adv = adversarial_accuracy(*d.model, data_.test, d.profile.adversary.epsilon);
  record({round, id, RecordEvent::Eval, now(), test.loss, test.accuracy, adv, 0, {}, 0.0});

  const EvalMetrics val = evaluate(*d.model, d.validation);
  d.history.push_back(val);
  auto& report = round_reports_[round];
  report.first += cfg_.early_stop.metric == EarlyStopMetric::Loss ? val.loss : val.accuracy;
  if (++report.second == devices_.size()) {
    daemon_history_.push_back(report.first / static_cast<double>(devices_.size()));
    round_reports_.erase(round);
    if (cfg_.early_stop.enabled) kernel_.schedule(kernel_.now(), id, StopCheck{round});
  }

  if (round < sessions_) {
    r.phase = Phase::Idle;
    kernel_.schedule(kernel_.now(), id, RoundStart{round + 1});
  } else {
    r.phase = Phase::Done;
    --active_;
  }
}

void Simulation::mobility_tick() {
  std::vector<Position> pos;
  pos.reserve(devices_.size());
  for (const auto& d : devices_) pos.push_back(d.position);
  update_positions(pos, waypoints_, cfg_.wireless.tick, cfg_.wireless.speed, cfg_.wireless.arena, mobility_rng_);
  for (std::size_t i = 0; i < devices_.size(); ++i) devices_[i].position = pos[i];
  if (active_ > 0) kernel_.schedule(kernel_.now() + cfg_.wireless.tick, 0, MobilityTick{});
}

void Simulation::stop_check() {
  if (early_stop(daemon_history_, cfg_.early_stop)) {
    stopped_early_ = true;
    stop_.store(true);
    log_info("early stopping after round " + std::to_string(daemon_history_.size()));
  }
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg, const SimObserver& observer) {
  const auto errors = validate(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  Simulation sim(cfg, observer);
  return sim.run();
}

}  // namespace peerfl
