#include <gtest/gtest.h>

#include <random>

#include "config.hpp"
#include "error.hpp"

using namespace peerfl;

namespace {

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

const char* kMinimal = R"(
seed: 1
devices: {count: 2}
data: {source: synthetic}
topology: {kind: ring}
)";

}  // namespace

TEST(Parse, MinimalConfigGetsDefaults) {
  const auto c = parse_config(kMinimal);
  SimConfig want;
  want.seed = 1;
  want.devices.resize(2);
  EXPECT_EQ(c, want);
  EXPECT_EQ(c.mode, RunMode::P2P);
  EXPECT_EQ(c.rounds, 5);
  EXPECT_EQ(c.channel.mtu, 12000u);
  EXPECT_EQ(c.wireless.tick, 1.0);
  EXPECT_EQ(c.timing.rows_per_mb, 64);
  EXPECT_EQ(c.timing.base_seconds_per_row, 0.0005);
  EXPECT_EQ(c.validation_fraction, 0.2);
  EXPECT_FALSE(c.early_stop.enabled);
  EXPECT_TRUE(validate(c).empty());
}

TEST(Parse, AdversaryOnDevice) {
  const auto c = parse_config(R"(
seed: 1
devices:
  - {}
  - {adversary: label_flip}
  - {adversary: {kind: noise_injection, sigma: 0.5}}
)");
  EXPECT_EQ(c.devices[0].adversary.kind, AdversaryKind::Honest);
  EXPECT_EQ(c.devices[1].adversary.kind, AdversaryKind::LabelFlip);
  EXPECT_EQ(c.devices[2].adversary, (AdversarySpec{AdversaryKind::NoiseInjection, 0.5, 0.0}));
}

TEST(Parse, MissingSeedNamesPath) { EXPECT_EQ(error_of("devices: {count: 2}\n").rfind("seed:", 0), 0u); }

TEST(Parse, UnknownKeysRejectedWithPath) {
  EXPECT_NE(error_of("seed: 1\ndevices: {count: 1}\ncolour: red\n").find("colour: unknown key"), std::string::npos);
  EXPECT_NE(error_of("seed: 1\ndevices: [{speed: 2}]\n").find("devices[0].speed: unknown key"), std::string::npos);
  EXPECT_NE(error_of("seed: 1\ndevices: {count: 1}\nchannel: {rte: 1}\n").find("channel.rte"), std::string::npos);
}

TEST(Parse, TypeMismatchNamesPath) {
  EXPECT_NE(error_of("seed: abc\ndevices: {count: 1}\n").find("seed: expected an integer"), std::string::npos);
  EXPECT_NE(error_of("seed: 1\nrounds: [1]\ndevices: {count: 1}\n").find("rounds"), std::string::npos);
  EXPECT_NE(error_of("seed: 1\ndevices: [{adversary: villain}]\n").find("devices[0].adversary"), std::string::npos);
  EXPECT_NE(error_of("seed: 1\ndevices: {count: 1}\nmode: hybrid\n").find("mode"), std::string::npos);
}

TEST(Parse, SyntaxErrorHasLineNumber) {
  const auto e = error_of("seed: 1\ndevices: {count: 2\nrounds: 3\n");
  EXPECT_EQ(e.rfind("line ", 0), 0u) << e;
}

TEST(Parse, SubsetRejectsAnchorsAliasesTagsAndDocuments) {
  EXPECT_NE(error_of("seed: &s 1\ndevices: {count: 1}\n").find("anchors"), std::string::npos);
  EXPECT_NE(error_of("a: &x {}\nseed: 1\ndevices: *x\n").find("line"), std::string::npos);
  EXPECT_NE(error_of("seed: !!int 1\ndevices: {count: 1}\n").find("tags"), std::string::npos);
  EXPECT_NE(error_of("seed: 1\ndevices: {count: 1}\n---\nseed: 2\n").find("multiple documents"), std::string::npos);
}

TEST(Parse, CountShorthandExpandsTemplate) {
  const auto c = parse_config("seed: 1\ndevices: {count: 450, template: {ram_mb: 8, accelerator: true}}\n");
  ASSERT_EQ(c.devices.size(), 450u);
  for (const auto& d : c.devices) {
    EXPECT_EQ(d.ram_mb, 8);
    EXPECT_TRUE(d.has_accelerator);
  }
}

TEST(Validate, DisconnectedTopologyNamesPair) {
  const auto c = parse_config("seed: 1\ndevices: {count: 4}\ntopology: {kind: explicit, edges: [[0,1],[2,3]]}\n");
  const auto errors = validate(c);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0], "topology: no path between device 0 and device 2");
}

TEST(Validate, WirelessNeedsAccessPoints) {
  const auto c = parse_config("seed: 1\ndevices: {count: 2}\nchannel: {mode: wireless}\n");
  EXPECT_TRUE(mentions(validate(c), "wireless.access_points"));
}

TEST(Validate, ReportsEveryViolation) {
  const auto c = parse_config(R"(
seed: 1
mode: centralized
aggregator: 9
learning_rate: -1
model: {layer_dims: [5, 3]}
devices: [{speed_factor: 0}, {ram_mb: 0}]
channel: {mode: wireless, loss: 1.0}
wireless: {access_points: [{id: 0, x: 1, y: 1}], tiers: [[80, 6000000], [60, 54000000]]}
)");
  const auto errors = validate(c);
  for (const char* path : {"aggregator", "learning_rate", "model.layer_dims", "devices[0].speed_factor",
                           "devices[1].ram_mb", "channel.loss", "wireless.tiers[1]"})
    EXPECT_TRUE(mentions(errors, path)) << path;
}

TEST(Validate, SendEdgesMustBeOverlayEdges) {
  const auto c = parse_config(
      "seed: 1\ndevices: {count: 3}\ntopology: {kind: line}\naggregation: {send_edges: [[0, 2]]}\n");
  EXPECT_TRUE(mentions(validate(c), "aggregation.send_edges[0]"));
}

TEST(Validate, MissingCsvIsReported) {
  const auto c = parse_config("seed: 1\ndevices: {count: 2}\ndata: {source: csv, path: /no/such.csv}\n");
  EXPECT_TRUE(mentions(validate(c), "/no/such.csv"));
}

TEST(Validate, PresetsAreValid) {
  ASSERT_EQ(preset_names(), (std::vector<std::string>{"line3", "star10", "scale100"}));
  for (const auto& name : preset_names()) {
    const auto text = preset_yaml(name);
    ASSERT_TRUE(text);
    EXPECT_TRUE(validate(parse_config(*text)).empty()) << name;
  }
  EXPECT_FALSE(preset_yaml("mesh"));
}

TEST(Render, RoundTripsPresetsAndEdgeCases) {
  for (const auto& name : preset_names()) {
    const auto c = parse_config(*preset_yaml(name));
    EXPECT_EQ(parse_config(render_config(c)), c) << name;
  }
  auto c = parse_config(kMinimal);
  c.learning_rate = 0.1 + 0.2;  // not representable in short decimal
  c.horizon = 1e-300;
  c.seed = -42;
  c.layer_dims = std::vector<int>{8, 3};
  c.topology.edge_cap_range = std::pair{1.5e6, 2.5e6};
  c.early_stop = EarlyStopConfig{true, 4, 0.001, EarlyStopMetric::Accuracy};
  c.devices[0].position = Position{1.0 / 3.0, 2};
  c.data.path = "dir with spaces/#data: file.csv";
  c.data.label_column = "true";
  EXPECT_EQ(parse_config(render_config(c)), c);
}

TEST(Render, RandomConfigsRoundTrip) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 300; ++t) {
    SimConfig c;
    c.seed = static_cast<std::int64_t>(rng());
    c.mode = rng() % 2 ? RunMode::P2P : RunMode::Centralized;
    c.rounds = static_cast<int>(rng() % 20);
    c.learning_rate = u(rng);
    c.validation_fraction = u(rng) * 0.9;
    c.compression = rng() % 2 ? Compression::None : Compression::Quantized8;
    if (rng() % 2) c.hidden = {static_cast<int>(1 + rng() % 30)};
    c.data.separation = u(rng) * 10;
    c.partition = PartitionSpec{rng() % 2 ? PartitionKind::Iid : PartitionKind::Dirichlet, u(rng)};
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      DeviceProfile d;
      d.speed_factor = 0.1 + u(rng);
      d.ram_mb = static_cast<int>(1 + rng() % 4096);
      d.bandwidth_cap = 1e6 * (1 + u(rng));
      d.has_accelerator = rng() % 2;
      d.adversary.kind = static_cast<AdversaryKind>(rng() % 6);
      d.adversary.sigma = u(rng);
      d.adversary.epsilon = u(rng);
      if (rng() % 3 == 0) d.position = Position{u(rng) * 100, u(rng) * 100};
      c.devices.push_back(d);
    }
    c.topology.kind = static_cast<TopologyKind>(rng() % 6);
    if (rng() % 2) c.topology.edges = {{0, 1}, {1, 2}};
    c.aggregation.kind = static_cast<AggregationKind>(rng() % 3);
    c.aggregation.fanout = static_cast<int>(1 + rng() % 4);
    if (rng() % 2) c.aggregation.send_edges = {{1, 0}};
    c.channel = ChannelSpec{rng() % 2 ? ChannelMode::Ideal : ChannelMode::Wireless, 1e6 * (1 + u(rng)), u(rng),
                            u(rng) * 0.9, rng() % 2 ? LossMode::Expected : LossMode::Stochastic, 1 + rng() % 20000};
    c.wireless.access_points = {{0, {u(rng) * 100, u(rng) * 100}, 1e8}, {3, {5, 5}, 2e8}};
    c.wireless.tiers = {{55.5, 40e6}, {70, 10e6}, {90, 2e6}};
    c.wireless.speed = u(rng) * 5;
    c.early_stop = EarlyStopConfig{rng() % 2 == 0, static_cast<int>(1 + rng() % 5), u(rng),
                                   rng() % 2 ? EarlyStopMetric::Loss : EarlyStopMetric::Accuracy};
    c.timing.base_seconds_per_row = u(rng) * 1e-3 + 1e-6;
    const auto text = render_config(c);
    ASSERT_EQ(parse_config(text), c) << text;
  }
}
