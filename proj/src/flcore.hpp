#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "adversary.hpp"
#include "config.hpp"
#include "kernel.hpp"
#include "learning.hpp"
#include "metrics.hpp"
#include "net.hpp"
#include "rng.hpp"

namespace peerfl {

/// Coordinate-wise weighted mean of `local` and `received`. `weights`, when
/// non-empty, holds one entry for local followed by one per received model.
/// Identical inputs return `local` exactly, and the result does not depend on
/// the order of the received models. Throws std::invalid_argument on shape
/// mismatch or bad weights.
ModelParams aggregate(const ModelParams& local, std::span<const ModelParams> received,
                      std::span<const double> weights = {});

/// Simulated seconds to run `epochs` over `shard_rows` on this device.
double compute_time(const DeviceProfile& device, std::size_t shard_rows, int epochs, const TimingSpec& timing);

struct BatchDecision {
  int batch = 1;
  bool clamped = false;
};

/// Caps the batch at floor(ram_mb * rows_per_mb), never below 1.
BatchDecision effective_batch(const DeviceProfile& device, int requested, int rows_per_mb);

/// Uniform sample of min(fanout, |peers|) neighbors without replacement,
/// returned in ascending order.
std::vector<NodeId> gossip_select(std::span<const NodeId> peers, int fanout, Rng& rng);

/// Patience rule over a metric history. An entry that beats the best so far
/// by more than min_delta resets the count; an entry that fails to beat it
/// at all adds one; a marginal new best (within min_delta) leaves the count
/// unchanged. Returns true once the count reaches `patience`.
bool early_stop(std::span<const double> history, const EarlyStopConfig& cfg);

/// One simulated participant.
struct DeviceState {
  NodeId id = 0;
  DeviceProfile profile;
  Dataset shard;       // training rows
  Dataset validation;  // early-stopping rows
  std::optional<ModelParams> model;
  Position position;
  std::vector<EvalMetrics> history;  // validation metrics after each exchange
};

/// Everything a P2P receive step needs besides the device itself.
struct ReceiveContext {
  ModelShape shape;
  int round = 1;
  int epochs = 1;  // 0 skips local training
  int batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  Compression compression = Compression::None;
  AggregationKind aggregation = AggregationKind::PeerAverage;
  std::vector<NodeId> targets;             // next peers
  std::vector<std::size_t> shard_rows;     // per device, for weighted averaging
  TimingSpec timing;
  SimTime now;
};

struct ReceiveOutcome {
  std::vector<NodeId> dropped;     // senders whose payload failed to decode
  EvalMetrics validation;          // aggregated model on the validation rows
  EvalMetrics training;            // trained model on the shard
  double compute_seconds = 0.0;
  std::vector<Message> outgoing;   // created_at = ctx.now + compute_seconds
};

/// Receive, unpack, average, train, extract, and address weights to the next
/// peers. Initializes the local model first if absent. Outgoing payloads pass
/// through the device's pre-send attack, if any; the stored model stays clean.
ReceiveOutcome on_receive(DeviceState& device, std::span<const Message> inbox, const ReceiveContext& ctx,
                          Rng& adversary_rng);

/// Seed for device `id`'s initial weights.
std::uint64_t init_seed(std::uint64_t run_seed, NodeId id);
/// Seed for the shuffle of device `id`'s training session `round`.
std::uint64_t train_seed(std::uint64_t run_seed, NodeId id, int round);

/// Local training with the run's per-round seed; epochs == 0 returns the
/// model unchanged with its metrics on `data`.
TrainResult train_session(const ModelParams& model, const Dataset& data, int epochs, int batch_size,
                          double learning_rate, std::uint64_t seed);

struct SimObserver {
  /// Called whenever a device finishes an exchange with its new model
  /// (P2P average, aggregator's global model, or a client's adopted copy).
  std::function<void(NodeId device, int round, const ModelParams& model)> on_exchange;
  std::function<void(const SimEvent&)> on_event;
};

struct SimResult {
  MetricsLog log;
  std::vector<ModelParams> final_models;
  std::vector<std::vector<EvalMetrics>> validation_history;
  std::vector<double> daemon_history;  // per-round mean validation metric
  SimTime end_time;
  bool stopped_early = false;
  std::uint64_t events = 0;
};

/// Runs a validated configuration end to end. Throws ConfigError listing all
/// violations before any event runs.
SimResult run_simulation(const SimConfig& cfg, const SimObserver& observer = {});

}  // namespace peerfl
