// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "flcore.hpp"
#include "learning.hpp"
#include "metrics.hpp"
#include "net.hpp"
#include "oracles.hpp"
#include "scenario.hpp"

using namespace peerfl;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig preset(const std::string& name) { return parse_config(*preset_yaml(name)); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::map<NodeId, double> final_eval_accuracy(const MetricsLog& log) {
  std::map<NodeId, double> acc;
  for (const auto& r : log)
    if (r.event == RecordEvent::Eval) acc[r.device] = *r.accuracy;
  return acc;
}

// 1. Centralized aggregation equals a scripted mean of the client models.
Verdict aggregation_oracle() {
  constexpr double kTol = 1e-12, kLimit = 10.0;
  const auto t0 = Clock::now();
  auto cfg = parse_config(R"(
seed: 21
mode: centralized
aggregator: 0
rounds: 4
epochs_per_round: 2
batch_size: 16
data: {rows: 1500, features: 6, classes: 3, separation: 2}
partition: {kind: dirichlet, alpha: 0.8}
devices: {count: 5}
topology: {kind: star, center: 0}
)");
  std::map<int, ModelParams> sim_global;
  SimObserver obs;
  obs.on_exchange = [&](NodeId id, int round, const ModelParams& m) {
    if (id == cfg.aggregator) sim_global.emplace(round, m);
  };
  run_simulation(cfg, obs);

  const auto data = build_datasets(cfg);
  const auto seed = static_cast<std::uint64_t>(cfg.seed);
  std::vector<ModelParams> start;
  for (NodeId i = 0; i < 5; ++i) start.push_back(init_model(data.shape, init_seed(seed, i)));
  double worst = 0.0;
  for (int k = 1; k <= cfg.rounds; ++k) {
    std::vector<std::vector<double>> trained;
    for (NodeId i = 0; i < 5; ++i)
      trained.push_back(train_session(start[i], data.train[i], cfg.epochs_per_round, cfg.batch_size,
                                      cfg.learning_rate, train_seed(seed, i, k))
                            .params.weights);
    const auto mean = oracle::plain_mean(trained);
    if (!sim_global.count(k)) return {false, fmt("no aggregate observed for round %d", k)};
    worst = std::max(worst, max_abs_diff(sim_global.at(k).weights, mean));
    for (auto& s : start) s.weights = sim_global.at(k).weights;  // clients adopt the broadcast
  }
  const double t = seconds_since(t0);
  return {worst <= kTol && t < kLimit, fmt("max |diff| %.3g (tol %.0e) over %d rounds, %.2fs (limit %.0fs)", worst,
                                           kTol, cfg.rounds, t, kLimit)};
}

// 2. Three-device line converges close to pooled-data training.
Verdict p2p_convergence() {
  constexpr double kFloor = 0.90, kGap = 0.05, kLimit = 30.0;
  const auto t0 = Clock::now();
  const auto cfg = preset("line3");
  const auto result = run_simulation(cfg);

  const auto data = build_datasets(cfg);
  Dataset pooled = data.train[0];
  for (std::size_t i = 1; i < data.train.size(); ++i) {
    pooled.features.insert(pooled.features.end(), data.train[i].features.begin(), data.train[i].features.end());
    pooled.labels.insert(pooled.labels.end(), data.train[i].labels.begin(), data.train[i].labels.end());
    pooled.rows += data.train[i].rows;
  }
  const auto seed = static_cast<std::uint64_t>(cfg.seed);
  const auto central =
      train(init_model(data.shape, init_seed(seed, 0)), pooled,
            TrainConfig{cfg.rounds * cfg.epochs_per_round, cfg.batch_size, cfg.learning_rate, train_seed(seed, 0, 1)});
  const double oracle_acc = evaluate(central.params, data.test).accuracy;

  bool ok = true;
  std::string accs;
  for (std::size_t i = 0; i < result.final_models.size(); ++i) {
    const double a = evaluate(result.final_models[i], data.test).accuracy;
    ok = ok && a >= kFloor && std::abs(a - oracle_acc) <= kGap;
    accs += fmt("%s%.4f", i ? " " : "", a);
  }
  const double t = seconds_since(t0);
  return {ok && t < kLimit, fmt("device acc [%s], pooled oracle %.4f (floor %.2f, gap %.2f), %.2fs (limit %.0fs)",
                                accs.c_str(), oracle_acc, kFloor, kGap, t, kLimit)};
}

// 3. BFS routes have Floyd-Warshall hop counts.
Verdict routing_oracle() {
  constexpr int kGraphs = 200;
  constexpr double kLimit = 10.0;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t pairs = 0, mismatches = 0;
  for (int g = 0; g < kGraphs; ++g) {
    const std::size_t n = 2 + rng() % 11;
    const auto graph = oracle::random_connected_graph(n, std::uniform_real_distribution<double>(0.0, 0.6)(rng), rng);
    const auto fw = oracle::floyd_warshall(graph);
    RoutingTable table(graph);
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b) {
        if (a == b) continue;
        ++pairs;
        const auto path = table.route(a, b);
        bool valid = !path.empty() && path.front() == a && path.back() == b;
        for (std::size_t h = 0; valid && h + 1 < path.size(); ++h) valid = graph.connected(path[h], path[h + 1]);
        if (!valid || static_cast<int>(path.size()) - 1 != fw[a][b]) ++mismatches;
      }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < kLimit,
          fmt("%zu/%zu pairs mismatched over %d graphs, %.2fs (limit %.0fs)", mismatches, pairs, kGraphs, t, kLimit)};
}

// 4. Analytic gradients agree with central differences.
Verdict gradient_check() {
  constexpr int kInstances = 100;
  constexpr double kH = 1e-5, kTol = 1e-5, kFloor = 1e-4;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const int d = 1 + static_cast<int>(rng() % 8), h = 1 + static_cast<int>(rng() % 5),
              c = 2 + static_cast<int>(rng() % 2);
    const ModelShape s{rng() % 2 ? std::vector<int>{d, h, c} : std::vector<int>{d, c}};
    auto p = init_model(s, rng());
    for (double& w : p.weights) w += 0.1 * n01(rng);
    const std::size_t m = 1 + rng() % 16;
    std::vector<double> x(m * d);
    for (double& v : x) v = n01(rng);
    std::vector<int> y(m);
    for (int& v : y) v = static_cast<int>(rng() % c);
    const auto lg = loss_and_grad(p, x, y);
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      const double num = oracle::fd_partial(p, x, y, k, kH);
      worst = std::max(worst, std::abs(lg.grad[k] - num) / std::max({std::abs(lg.grad[k]), std::abs(num), kFloor}));
    }
  }
  return {worst < kTol, fmt("max relative error %.3g over %d instances (tol %.0e)", worst, kInstances, kTol)};
}

// 5. Expected-mode closed form, Stochastic-mode mean.
Verdict transfer_law() {
  constexpr int kTrials = 10'000;
  constexpr double kRel = 0.02;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> rate(1e5, 1e8), delay(0.0, 0.1), loss(0.0, 0.5);
  Rng rng(17);
  std::size_t inexact = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<ChannelState> hops;
    for (int h = 0; h < 1 + t % 6; ++h) hops.push_back({rate(gen), delay(gen), loss(gen)});
    const std::uint64_t size = 1 + gen() % 50'000'000;
    if (transfer_time(size, hops, LossMode::Expected, kDefaultMtuBits, rng) !=
        oracle::expected_transfer(static_cast<double>(size), hops))
      ++inexact;
  }
  bool ok = inexact == 0;
  std::string devs;
  for (double p : {0.0, 0.1, 0.3}) {
    const std::vector<ChannelState> hops{{2e6, 0.01, p}, {5e5, 0.02, p}};
    const std::uint64_t size = 600'000;
    double sum = 0.0;
    for (int i = 0; i < kTrials; ++i) sum += transfer_time(size, hops, LossMode::Stochastic, kDefaultMtuBits, rng);
    const double expected = transfer_time(size, hops, LossMode::Expected, kDefaultMtuBits, rng);
    const double rel = std::abs(sum / kTrials - expected) / expected;
    ok = ok && rel <= kRel;
    devs += fmt(" p=%.1f:%.4f", p, rel);
  }
  return {ok, fmt("%zu/1000 expected-mode mismatches; stochastic rel dev%s (tol %.2f)", inexact, devs.c_str(), kRel)};
}

// 6. Sparser overlays cost more communication time.
Verdict scaling_trend() {
  constexpr double kRatio = 1.5, kLimit = 300.0;
  const auto t0 = Clock::now();
  auto comm = [](std::size_t degree) {
    auto cfg = preset("scale100");
    cfg.topology.kind = TopologyKind::RandomRegular;
    cfg.topology.degree = degree;
    return summarize(run_simulation(cfg).log).comm_time;
  };
  const double c3 = comm(3), c8 = comm(8);
  const double t = seconds_since(t0);
  return {c3 >= kRatio * c8 && t < kLimit,
          fmt("comm time degree 3 %.3fs vs degree 8 %.3fs, ratio %.3f (min %.1f), %.2fs (limit %.0fs)", c3, c8,
              c3 / c8, kRatio, t, kLimit)};
}

// 7. Same seed, same bytes; different seed, different bytes.
Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "peerfl_acceptance";
  fs::create_directories(dir);
  auto write = [&](const SimConfig& cfg, const std::string& name) {
    const auto p = (dir / name).string();
    write_metrics(run_simulation(cfg).log, p, MetricsFormat::Csv);
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto gossip = parse_config(R"(
seed: 13
rounds: 3
data: {rows: 600, features: 4, classes: 3}
devices: {count: 6}
topology: {kind: complete}
aggregation: {kind: gossip_push, fanout: 2}
channel: {mode: wireless, loss: 0.1, loss_mode: stochastic}
wireless: {access_points: [{id: 0, x: 50, y: 50}]}
compression: quantized8
)");
  std::vector<std::pair<std::string, SimConfig>> configs{
      {"line3", preset("line3")}, {"star10", preset("star10")}, {"gossip", gossip}};
  std::size_t same_ok = 0, diff_ok = 0;
  for (auto& [name, cfg] : configs) {
    const auto a = write(cfg, name + "_a.csv");
    const auto b = write(cfg, name + "_b.csv");
    cfg.seed += 1;
    const auto c = write(cfg, name + "_c.csv");
    same_ok += !a.empty() && a == b;
    diff_ok += a != c;
  }
  fs::remove_all(dir);
  const bool ok = same_ok == configs.size() && diff_ok == configs.size();
  return {ok, fmt("%zu/%zu configs byte-identical on rerun, %zu/%zu changed with seed", same_ok, configs.size(),
                  diff_ok, configs.size())};
}

// 8. One label-flipping peer in a ring hurts the honest peers. Skewed shards
// leave some classes mostly on the adversary, so averaging carries its flips.
Verdict adversary_effect() {
  constexpr double kDrop = 0.05;
  constexpr NodeId kAdversary = 3;
  const auto base_cfg = parse_config(R"(
seed: 8
rounds: 5
epochs_per_round: 3
data: {rows: 2400, features: 6, classes: 4, separation: 3}
partition: {kind: dirichlet, alpha: 0.1}
devices: {count: 4}
topology: {kind: ring}
)");
  const auto base = run_simulation(base_cfg);
  auto flip_cfg = base_cfg;
  flip_cfg.devices[kAdversary].adversary = AdversarySpec{AdversaryKind::LabelFlip};
  const auto flipped = run_simulation(flip_cfg);
  auto honest_cfg = base_cfg;
  honest_cfg.devices[kAdversary].adversary = AdversarySpec{AdversaryKind::Honest};
  const auto honest = run_simulation(honest_cfg);

  auto honest_mean = [&](const SimResult& r) {
    const auto acc = final_eval_accuracy(r.log);
    double s = 0.0;
    for (NodeId i = 0; i < 4; ++i)
      if (i != kAdversary) s += acc.at(i);
    return s / 3.0;
  };
  const double a0 = honest_mean(base), a1 = honest_mean(flipped);
  const bool identical = format_metrics(base.log, MetricsFormat::Csv) == format_metrics(honest.log, MetricsFormat::Csv);
  return {a0 - a1 >= kDrop && identical,
          fmt("honest mean accuracy %.4f baseline vs %.4f with label flip, drop %.4f (min %.2f); Honest run %s",
              a0, a1, a0 - a1, kDrop, identical ? "byte-identical" : "differs")};
}

// 9. Early stopping on scripted sequences.
Verdict early_stopping() {
  EarlyStopConfig cfg;
  cfg.enabled = true;
  cfg.patience = 2;
  cfg.min_delta = 0.02;
  const std::vector<double> seq{1.0, 0.8, 0.79, 0.79, 0.79};
  int first_stop = 0;
  for (std::size_t k = 1; k <= seq.size() && !first_stop; ++k)
    if (early_stop(std::span(seq).first(k), cfg)) first_stop = static_cast<int>(k);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> step(1e-6, 0.1);
  int false_stops = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<double> h{10.0};
    for (int k = 0; k < 60; ++k) {
      h.push_back(h.back() - step(rng));
      if (early_stop(h, cfg)) {
        ++false_stops;
        break;
      }
    }
  }
  return {first_stop == 5 && false_stops == 0,
          fmt("scripted sequence stops after entry %d (want 5); %d/500 strictly improving sequences stopped",
              first_stop, false_stops)};
}

// 10. Hundreds of devices within time and memory limits.
Verdict scale_smoke() {
  constexpr double kLimit = 600.0, kMemMb = 2048.0;
  const auto t0 = Clock::now();
  const auto cfg = parse_config(R"(
seed: 450
rounds: 2
epochs_per_round: 1
data: {rows: 45000, features: 8, classes: 3}
devices: {count: 450}
topology: {kind: ring}
channel: {mode: ideal}
)");
  std::string error;
  std::size_t evals = 0;
  try {
    const auto r = run_simulation(cfg);
    evals = final_eval_accuracy(r.log).size();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double t = seconds_since(t0);
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  const double peak_mb = static_cast<double>(ru.ru_maxrss) / 1024.0;  // Linux reports KiB
  const bool ok = error.empty() && evals == 450 && t < kLimit && peak_mb < kMemMb;
  return {ok, error.empty() ? fmt("%zu devices evaluated, %.2fs (limit %.0fs), peak RSS %.1f MB (limit %.0f MB)",
                                  evals, t, kLimit, peak_mb, kMemMb)
                            : "run failed: " + error};
}

// 11. Quantized8 error bound and payload shrink.
Verdict compression_bound() {
  constexpr double kShrink = 7.0;
  std::mt19937_64 rng(11);
  std::size_t violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 1 + static_cast<int>(rng() % 12), c = 2 + static_cast<int>(rng() % 4);
    const ModelShape s{rng() % 2 ? std::vector<int>{d, 1 + static_cast<int>(rng() % 8), c} : std::vector<int>{d, c}};
    ModelParams p{s, std::vector<double>(s.param_count())};
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(rng));
    std::normal_distribution<double> dist(0.0, scale);
    for (double& w : p.weights) w = dist(rng);
    const auto back = deserialize(serialize(p, Compression::Quantized8), s, Compression::Quantized8);
    // Tensor boundaries: per layer, weights then biases.
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < s.layer_dims.size(); ++l) {
      const std::size_t in = s.layer_dims[l], out = s.layer_dims[l + 1];
      for (std::size_t len : {in * out, out}) {
        const auto lo = std::min_element(p.weights.begin() + off, p.weights.begin() + off + len);
        const auto hi = std::max_element(p.weights.begin() + off, p.weights.begin() + off + len);
        const double bound = (*hi - *lo) / 255.0;
        for (std::size_t i = off; i < off + len; ++i)
          if (std::abs(back.weights[i] - p.weights[i]) > bound) ++violations;
        off += len;
      }
    }
  }
  double worst_shrink = 1e300;
  for (const auto& dims : {std::vector<int>{100, 10}, std::vector<int>{64, 32, 10}, std::vector<int>{784, 10}}) {
    const auto p = init_model(ModelShape{dims}, 1);
    const double shrink = static_cast<double>(serialize(p, Compression::None).size()) /
                          static_cast<double>(serialize(p, Compression::Quantized8).size());
    worst_shrink = std::min(worst_shrink, shrink);
  }
  return {violations == 0 && worst_shrink >= kShrink,
          fmt("%zu bound violations over 1000 models; min shrink %.2fx (min %.0fx)", violations, worst_shrink,
              kShrink)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"aggregation oracle equivalence", aggregation_oracle},
      {"p2p convergence", p2p_convergence},
      {"routing oracle", routing_oracle},
      {"gradient correctness", gradient_check},
      {"transfer-time law", transfer_law},
      {"scaling trend", scaling_trend},
      {"determinism", determinism},
      {"adversary effect", adversary_effect},
      {"early stopping", early_stopping},
      {"scale smoke test", scale_smoke},
      {"compression bound", compression_bound},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
