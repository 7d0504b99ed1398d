#include "config.hpp"

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "scenario.hpp"

namespace peerfl {

std::string to_string(RunMode m) { return m == RunMode::Centralized ? "centralized" : "p2p"; }

std::string to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::Explicit: return "explicit";
    case TopologyKind::Line: return "line";
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Star: return "star";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::RandomRegular: return "random_regular";
  }
  return "unknown";
}

std::string to_string(AggregationKind k) {
  switch (k) {
    case AggregationKind::PeerAverage: return "peer_average";
    case AggregationKind::WeightedAverage: return "weighted_average";
    case AggregationKind::GossipPush: return "gossip_push";
  }
  return "unknown";
}

namespace {

// --- YAML subset enforcement -------------------------------------------------

class SubsetChecker : public YAML::EventHandler {
 public:
  void OnDocumentStart(const YAML::Mark& mark) override {
    if (++documents_ > 1) fail(mark, "multiple documents are not supported");
  }
  void OnDocumentEnd() override {}
  void OnNull(const YAML::Mark& mark, YAML::anchor_t anchor) override { no_anchor(mark, anchor); }
  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override { fail(mark, "aliases are not supported"); }
  void OnScalar(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor, const std::string&) override {
    no_anchor(mark, anchor);
    no_tag(mark, tag);
  }
  void OnSequenceStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                       YAML::EmitterStyle::value) override {
    no_anchor(mark, anchor);
    no_tag(mark, tag);
  }
  void OnSequenceEnd() override {}
  void OnMapStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                  YAML::EmitterStyle::value) override {
    no_anchor(mark, anchor);
    no_tag(mark, tag);
  }
  void OnMapEnd() override {}

 private:
  [[noreturn]] static void fail(const YAML::Mark& mark, const std::string& what) {
    throw ConfigError("line " + std::to_string(mark.line + 1) + ": " + what);
  }
  static void no_anchor(const YAML::Mark& mark, YAML::anchor_t anchor) {
    if (anchor != YAML::NullAnchor) fail(mark, "anchors are not supported");
  }
  static void no_tag(const YAML::Mark& mark, const std::string& tag) {
    if (!tag.empty() && tag != "?" && tag != "!") fail(mark, "explicit tags are not supported");
  }
  int documents_ = 0;
};

// --- typed field access -------------------------------------------------------

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

[[noreturn]] void bad(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void expect_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) bad(path, "expected a mapping");
}

void expect_seq(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) bad(path, "expected a list");
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
  expect_map(n, path);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      bad(join(path, key), "unknown key");
  }
}

template <typename T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

template <typename T>
T as(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) bad(path, std::string("expected ") + type_name<T>());
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(path, std::string("expected ") + type_name<T>() + ", got '" + n.Scalar() + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
  if (const auto n = parent[key]) out = as<T>(n, join(path, key));
}

std::size_t as_count(const YAML::Node& n, const std::string& path) {
  const auto v = as<std::int64_t>(n, path);
  if (v < 0) bad(path, "must be non-negative");
  return static_cast<std::size_t>(v);
}

void read_count(const YAML::Node& parent, const char* key, const std::string& path, std::size_t& out) {
  if (const auto n = parent[key]) out = as_count(n, join(path, key));
}

NodeId as_node(const YAML::Node& n, const std::string& path) {
  return static_cast<NodeId>(std::min<std::size_t>(as_count(n, path), UINT32_MAX));
}

template <typename E>
E as_enum(const YAML::Node& n, const std::string& path, std::initializer_list<std::pair<const char*, E>> names) {
  const auto s = as<std::string>(n, path);
  for (const auto& [name, value] : names)
    if (s == name) return value;
  std::string choices;
  for (const auto& [name, value] : names) choices += (choices.empty() ? "" : "|") + std::string(name);
  bad(path, "unknown value '" + s + "' (expected " + choices + ")");
}

std::vector<int> as_int_list(const YAML::Node& n, const std::string& path) {
  expect_seq(n, path);
  std::vector<int> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(as<int>(n[i], index(path, i)));
  return out;
}

std::vector<Edge> as_edges(const YAML::Node& n, const std::string& path) {
  expect_seq(n, path);
  std::vector<Edge> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto p = index(path, i);
    if (!n[i].IsSequence() || n[i].size() != 2) bad(p, "expected a [from, to] pair");
    out.emplace_back(as_node(n[i][0], index(p, 0)), as_node(n[i][1], index(p, 1)));
  }
  return out;
}

std::pair<double, double> as_pair(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 2) bad(path, "expected a two-element list");
  return {as<double>(n[0], index(path, 0)), as<double>(n[1], index(path, 1))};
}

// --- sections -------------------------------------------------------------------

AdversarySpec parse_adversary(const YAML::Node& n, const std::string& path) {
  AdversarySpec spec;
  if (n.IsMap()) {
    check_keys(n, path, {"kind", "sigma", "epsilon"});
    if (!n["kind"]) bad(join(path, "kind"), "required");
    read(n, "sigma", path, spec.sigma);
    read(n, "epsilon", path, spec.epsilon);
  }
  // Never reassign a YAML::Node: assignment writes through to the shared node.
  const auto p = n.IsMap() ? join(path, "kind") : path;
  const auto name = n.IsMap() ? as<std::string>(n["kind"], p) : as<std::string>(n, p);
  const auto kind = adversary_kind_from_string(name);
  if (!kind) bad(p, "unknown adversary kind '" + name + "'");
  spec.kind = *kind;
  return spec;
}

DeviceProfile parse_device(const YAML::Node& n, const std::string& path, DeviceProfile d) {
  check_keys(n, path, {"speed_factor", "ram_mb", "bandwidth_cap", "accelerator", "adversary", "position"});
  read(n, "speed_factor", path, d.speed_factor);
  read(n, "ram_mb", path, d.ram_mb);
  read(n, "bandwidth_cap", path, d.bandwidth_cap);
  read(n, "accelerator", path, d.has_accelerator);
  if (const auto a = n["adversary"]) d.adversary = parse_adversary(a, join(path, "adversary"));
  if (const auto p = n["position"]) {
    const auto [x, y] = as_pair(p, join(path, "position"));
    d.position = Position{x, y};
  }
  return d;
}

std::vector<DeviceProfile> parse_devices(const YAML::Node& n, const std::string& path) {
  std::vector<DeviceProfile> out;
  if (n.IsSequence()) {
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(parse_device(n[i], index(path, i), {}));
    return out;
  }
  check_keys(n, path, {"count", "template"});
  if (!n["count"]) bad(join(path, "count"), "required");
  const std::size_t count = as_count(n["count"], join(path, "count"));
  DeviceProfile tmpl;
  if (const auto t = n["template"]) tmpl = parse_device(t, join(path, "template"), {});
  out.assign(count, tmpl);
  return out;
}

void parse_model(const YAML::Node& n, const std::string& path, SimConfig& c) {
  check_keys(n, path, {"hidden", "layer_dims"});
  if (const auto h = n["hidden"]) c.hidden = as_int_list(h, join(path, "hidden"));
  if (const auto l = n["layer_dims"]) c.layer_dims = as_int_list(l, join(path, "layer_dims"));
}

void parse_data(const YAML::Node& n, const std::string& path, DataSpec& d) {
  check_keys(n, path, {"source", "rows", "features", "classes", "separation", "path", "label_column", "test_fraction"});
  if (const auto s = n["source"])
    d.source = as_enum<DataSource>(s, join(path, "source"), {{"synthetic", DataSource::Synthetic}, {"csv", DataSource::Csv}});
  read_count(n, "rows", path, d.rows);
  read_count(n, "features", path, d.features);
  read(n, "classes", path, d.classes);
  read(n, "separation", path, d.separation);
  read(n, "path", path, d.path);
  read(n, "label_column", path, d.label_column);
  read(n, "test_fraction", path, d.test_fraction);
}

void parse_partition(const YAML::Node& n, const std::string& path, PartitionSpec& p) {
  check_keys(n, path, {"kind", "alpha"});
  if (const auto k = n["kind"])
    p.kind = as_enum<PartitionKind>(k, join(path, "kind"), {{"iid", PartitionKind::Iid}, {"dirichlet", PartitionKind::Dirichlet}});
  read(n, "alpha", path, p.alpha);
}

void parse_topology(const YAML::Node& n, const std::string& path, TopologySpec& t) {
  check_keys(n, path, {"kind", "degree", "center", "edges", "edge_cap_range"});
  if (const auto k = n["kind"])
    t.kind = as_enum<TopologyKind>(k, join(path, "kind"),
                                   {{"explicit", TopologyKind::Explicit},
                                    {"line", TopologyKind::Line},
                                    {"ring", TopologyKind::Ring},
                                    {"star", TopologyKind::Star},
                                    {"complete", TopologyKind::Complete},
                                    {"random_regular", TopologyKind::RandomRegular}});
  read_count(n, "degree", path, t.degree);
  if (const auto c = n["center"]) t.center = as_node(c, join(path, "center"));
  if (const auto e = n["edges"]) t.edges = as_edges(e, join(path, "edges"));
  if (const auto r = n["edge_cap_range"]) t.edge_cap_range = as_pair(r, join(path, "edge_cap_range"));
}

void parse_aggregation(const YAML::Node& n, const std::string& path, AggregationSpec& a) {
  check_keys(n, path, {"kind", "fanout", "send_edges"});
  if (const auto k = n["kind"])
    a.kind = as_enum<AggregationKind>(k, join(path, "kind"),
                                      {{"peer_average", AggregationKind::PeerAverage},
                                       {"weighted_average", AggregationKind::WeightedAverage},
                                       {"gossip_push", AggregationKind::GossipPush}});
  read(n, "fanout", path, a.fanout);
  if (const auto e = n["send_edges"]) a.send_edges = as_edges(e, join(path, "send_edges"));
}

void parse_channel(const YAML::Node& n, const std::string& path, ChannelSpec& c) {
  check_keys(n, path, {"mode", "rate", "delay", "loss", "loss_mode", "mtu"});
  if (const auto m = n["mode"])
    c.mode = as_enum<ChannelMode>(m, join(path, "mode"), {{"ideal", ChannelMode::Ideal}, {"wireless", ChannelMode::Wireless}});
  read(n, "rate", path, c.rate);
  read(n, "delay", path, c.delay);
  read(n, "loss", path, c.loss);
  if (const auto m = n["loss_mode"])
    c.loss_mode = as_enum<LossMode>(m, join(path, "loss_mode"),
                                    {{"expected", LossMode::Expected}, {"stochastic", LossMode::Stochastic}});
  if (const auto m = n["mtu"]) c.mtu = as_count(m, join(path, "mtu"));
}

void parse_wireless(const YAML::Node& n, const std::string& path, WirelessSpec& w) {
  check_keys(n, path, {"arena", "access_points", "tiers", "floor_rate", "path_loss", "speed", "tick"});
  if (const auto a = n["arena"]) {
    const auto [width, height] = as_pair(a, join(path, "arena"));
    w.arena = Arena{width, height};
  }
  if (const auto aps = n["access_points"]) {
    const auto p = join(path, "access_points");
    expect_seq(aps, p);
    w.access_points.clear();
    for (std::size_t i = 0; i < aps.size(); ++i) {
      const auto ap_path = index(p, i);
      check_keys(aps[i], ap_path, {"id", "x", "y", "backbone_rate"});
      AccessPoint ap;
      ap.id = static_cast<int>(i);
      read(aps[i], "id", ap_path, ap.id);
      read(aps[i], "x", ap_path, ap.position.x);
      read(aps[i], "y", ap_path, ap.position.y);
      read(aps[i], "backbone_rate", ap_path, ap.backbone_rate);
      w.access_points.push_back(ap);
    }
  }
  if (const auto t = n["tiers"]) {
    const auto p = join(path, "tiers");
    expect_seq(t, p);
    w.tiers.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto [loss, rate] = as_pair(t[i], index(p, i));
      w.tiers.push_back({loss, rate});
    }
  }
  read(n, "floor_rate", path, w.floor_rate);
  if (const auto pl = n["path_loss"]) {
    const auto p = join(path, "path_loss");
    check_keys(pl, p, {"exponent", "ref_loss_db", "ref_dist"});
    read(pl, "exponent", p, w.path_loss.exponent);
    read(pl, "ref_loss_db", p, w.path_loss.ref_loss_db);
    read(pl, "ref_dist", p, w.path_loss.ref_dist);
  }
  read(n, "speed", path, w.speed);
  read(n, "tick", path, w.tick);
}

void parse_early_stop(const YAML::Node& n, const std::string& path, EarlyStopConfig& e) {
  check_keys(n, path, {"enabled", "patience", "min_delta", "metric"});
  e.enabled = true;
  read(n, "enabled", path, e.enabled);
  read(n, "patience", path, e.patience);
  read(n, "min_delta", path, e.min_delta);
  if (const auto m = n["metric"])
    e.metric = as_enum<EarlyStopMetric>(m, join(path, "metric"),
                                        {{"loss", EarlyStopMetric::Loss}, {"accuracy", EarlyStopMetric::Accuracy}});
}

void parse_timing(const YAML::Node& n, const std::string& path, TimingSpec& t) {
  check_keys(n, path, {"base_seconds_per_row", "accelerator_speedup", "rows_per_mb"});
  read(n, "base_seconds_per_row", path, t.base_seconds_per_row);
  read(n, "accelerator_speedup", path, t.accelerator_speedup);
  read(n, "rows_per_mb", path, t.rows_per_mb);
}

}  // namespace

SimConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    std::istringstream stream(text);
    YAML::Parser parser(stream);
    SubsetChecker checker;
    while (parser.HandleNextDocument(checker)) {
    }
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError("configuration is empty");
  check_keys(root, "",
             {"seed", "mode", "aggregator", "rounds", "epochs_per_round", "batch_size", "learning_rate",
              "validation_fraction", "horizon", "compression", "model", "data", "partition", "devices", "topology",
              "aggregation", "channel", "wireless", "early_stop", "timing"});

  SimConfig c;
  if (!root["seed"]) bad("seed", "required");
  c.seed = as<std::int64_t>(root["seed"], "seed");
  if (const auto m = root["mode"])
    c.mode = as_enum<RunMode>(m, "mode", {{"centralized", RunMode::Centralized}, {"p2p", RunMode::P2P}});
  if (const auto a = root["aggregator"]) c.aggregator = as_node(a, "aggregator");
  read(root, "rounds", "", c.rounds);
  read(root, "epochs_per_round", "", c.epochs_per_round);
  read(root, "batch_size", "", c.batch_size);
  read(root, "learning_rate", "", c.learning_rate);
  read(root, "validation_fraction", "", c.validation_fraction);
  read(root, "horizon", "", c.horizon);
  if (const auto m = root["compression"])
    c.compression = as_enum<Compression>(m, "compression", {{"none", Compression::None}, {"quantized8", Compression::Quantized8}});
  if (const auto n = root["model"]) parse_model(n, "model", c);
  if (const auto n = root["data"]) parse_data(n, "data", c.data);
  if (const auto n = root["partition"]) parse_partition(n, "partition", c.partition);
  if (!root["devices"]) bad("devices", "required");
  c.devices = parse_devices(root["devices"], "devices");
  if (const auto n = root["topology"]) parse_topology(n, "topology", c.topology);
  if (const auto n = root["aggregation"]) parse_aggregation(n, "aggregation", c.aggregation);
  if (const auto n = root["channel"]) parse_channel(n, "channel", c.channel);
  if (const auto n = root["wireless"]) parse_wireless(n, "wireless", c.wireless);
  if (const auto n = root["early_stop"]) parse_early_stop(n, "early_stop", c.early_stop);
  if (const auto n = root["timing"]) parse_timing(n, "timing", c.timing);
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

// --- rendering --------------------------------------------------------------------

namespace {

void emit_edges(YAML::Emitter& out, const std::vector<Edge>& edges) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& [a, b] : edges) out << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
  out << YAML::EndSeq;
}

void emit_pair(YAML::Emitter& out, double a, double b) {
  out << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
}

void emit_ints(YAML::Emitter& out, const std::vector<int>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int x : v) out << x;
  out << YAML::EndSeq;
}

}  // namespace

std::string render_config(const SimConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "mode" << YAML::Value << to_string(c.mode);
  out << YAML::Key << "aggregator" << YAML::Value << c.aggregator;
  out << YAML::Key << "rounds" << YAML::Value << c.rounds;
  out << YAML::Key << "epochs_per_round" << YAML::Value << c.epochs_per_round;
  out << YAML::Key << "batch_size" << YAML::Value << c.batch_size;
  out << YAML::Key << "learning_rate" << YAML::Value << c.learning_rate;
  out << YAML::Key << "validation_fraction" << YAML::Value << c.validation_fraction;
  out << YAML::Key << "horizon" << YAML::Value << c.horizon;
  out << YAML::Key << "compression" << YAML::Value
      << (c.compression == Compression::None ? "none" : "quantized8");

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "hidden" << YAML::Value;
  emit_ints(out, c.hidden);
  if (c.layer_dims) {
    out << YAML::Key << "layer_dims" << YAML::Value;
    emit_ints(out, *c.layer_dims);
  }
  out << YAML::EndMap;

  const auto& d = c.data;
  out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source" << YAML::Value << (d.source == DataSource::Synthetic ? "synthetic" : "csv");
  out << YAML::Key << "rows" << YAML::Value << d.rows;
  out << YAML::Key << "features" << YAML::Value << d.features;
  out << YAML::Key << "classes" << YAML::Value << d.classes;
  out << YAML::Key << "separation" << YAML::Value << d.separation;
  out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << d.path;
  out << YAML::Key << "label_column" << YAML::Value << YAML::DoubleQuoted << d.label_column;
  out << YAML::Key << "test_fraction" << YAML::Value << d.test_fraction;
  out << YAML::EndMap;

  out << YAML::Key << "partition" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << (c.partition.kind == PartitionKind::Iid ? "iid" : "dirichlet");
  out << YAML::Key << "alpha" << YAML::Value << c.partition.alpha;
  out << YAML::EndMap;

  out << YAML::Key << "devices" << YAML::Value << YAML::BeginSeq;
  for (const auto& dev : c.devices) {
    out << YAML::BeginMap;
    out << YAML::Key << "speed_factor" << YAML::Value << dev.speed_factor;
    out << YAML::Key << "ram_mb" << YAML::Value << dev.ram_mb;
    out << YAML::Key << "bandwidth_cap" << YAML::Value << dev.bandwidth_cap;
    out << YAML::Key << "accelerator" << YAML::Value << dev.has_accelerator;
    out << YAML::Key << "adversary" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(dev.adversary.kind);
    out << YAML::Key << "sigma" << YAML::Value << dev.adversary.sigma;
    out << YAML::Key << "epsilon" << YAML::Value << dev.adversary.epsilon;
    out << YAML::EndMap;
    if (dev.position) {
      out << YAML::Key << "position" << YAML::Value;
      emit_pair(out, dev.position->x, dev.position->y);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto& t = c.topology;
  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(t.kind);
  out << YAML::Key << "degree" << YAML::Value << t.degree;
  out << YAML::Key << "center" << YAML::Value << t.center;
  out << YAML::Key << "edges" << YAML::Value;
  emit_edges(out, t.edges);
  if (t.edge_cap_range) {
    out << YAML::Key << "edge_cap_range" << YAML::Value;
    emit_pair(out, t.edge_cap_range->first, t.edge_cap_range->second);
  }
  out << YAML::EndMap;

  out << YAML::Key << "aggregation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.aggregation.kind);
  out << YAML::Key << "fanout" << YAML::Value << c.aggregation.fanout;
  out << YAML::Key << "send_edges" << YAML::Value;
  emit_edges(out, c.aggregation.send_edges);
  out << YAML::EndMap;

  const auto& ch = c.channel;
  out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << (ch.mode == ChannelMode::Ideal ? "ideal" : "wireless");
  out << YAML::Key << "rate" << YAML::Value << ch.rate;
  out << YAML::Key << "delay" << YAML::Value << ch.delay;
  out << YAML::Key << "loss" << YAML::Value << ch.loss;
  out << YAML::Key << "loss_mode" << YAML::Value << (ch.loss_mode == LossMode::Expected ? "expected" : "stochastic");
  out << YAML::Key << "mtu" << YAML::Value << ch.mtu;
  out << YAML::EndMap;

  const auto& w = c.wireless;
  out << YAML::Key << "wireless" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "arena" << YAML::Value;
  emit_pair(out, w.arena.width, w.arena.height);
  out << YAML::Key << "access_points" << YAML::Value << YAML::BeginSeq;
  for (const auto& ap : w.access_points) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << ap.id;
    out << YAML::Key << "x" << YAML::Value << ap.position.x;
    out << YAML::Key << "y" << YAML::Value << ap.position.y;
    out << YAML::Key << "backbone_rate" << YAML::Value << ap.backbone_rate;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "tiers" << YAML::Value << YAML::BeginSeq;
  for (const auto& tier : w.tiers) emit_pair(out, tier.max_loss_db, tier.rate_bps);
  out << YAML::EndSeq;
  out << YAML::Key << "floor_rate" << YAML::Value << w.floor_rate;
  out << YAML::Key << "path_loss" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "exponent" << YAML::Value << w.path_loss.exponent;
  out << YAML::Key << "ref_loss_db" << YAML::Value << w.path_loss.ref_loss_db;
  out << YAML::Key << "ref_dist" << YAML::Value << w.path_loss.ref_dist;
  out << YAML::EndMap;
  out << YAML::Key << "speed" << YAML::Value << w.speed;
  out << YAML::Key << "tick" << YAML::Value << w.tick;
  out << YAML::EndMap;

  if (c.early_stop != EarlyStopConfig{}) {
    out << YAML::Key << "early_stop" << YAML::Value << YAML::BeginMap;
    if (!c.early_stop.enabled) out << YAML::Key << "enabled" << YAML::Value << false;
    out << YAML::Key << "patience" << YAML::Value << c.early_stop.patience;
    out << YAML::Key << "min_delta" << YAML::Value << c.early_stop.min_delta;
    out << YAML::Key << "metric" << YAML::Value
        << (c.early_stop.metric == EarlyStopMetric::Loss ? "loss" : "accuracy");
    out << YAML::EndMap;
  }

  out << YAML::Key << "timing" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "base_seconds_per_row" << YAML::Value << c.timing.base_seconds_per_row;
  out << YAML::Key << "accelerator_speedup" << YAML::Value << c.timing.accelerator_speedup;
  out << YAML::Key << "rows_per_mb" << YAML::Value << c.timing.rows_per_mb;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// --- validation ---------------------------------------------------------------------

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

class Violations {
 public:
  void add(const std::string& path, const std::string& what) { list_.push_back(path + ": " + what); }
  void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) add(path, what);
  }
  std::vector<std::string> take() { return std::move(list_); }
  bool empty() const { return list_.empty(); }

 private:
  std::vector<std::string> list_;
};

void check_edges(Violations& v, const std::vector<Edge>& edges, std::size_t n, const std::string& path) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& [a, b] = edges[i];
    if (a >= n || b >= n)
      v.add(index(path, i), "endpoint out of range for " + std::to_string(n) + " devices");
    else if (a == b)
      v.add(index(path, i), "self-loop on node " + std::to_string(a));
  }
}

}  // namespace

std::vector<std::string> validate(const SimConfig& c) {
  Violations v;
  const std::size_t n = c.devices.size();
  v.require(n >= 1, "devices", "at least one device is required");
  v.require(c.rounds >= 0, "rounds", "must be non-negative");
  v.require(c.epochs_per_round >= 0, "epochs_per_round", "must be non-negative");
  v.require(c.batch_size >= 1, "batch_size", "must be at least 1");
  v.require(positive(c.learning_rate), "learning_rate", "must be finite and positive");
  v.require(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0, "validation_fraction", "must be in [0, 1)");
  v.require(positive(c.horizon), "horizon", "must be finite and positive");

  v.require(c.hidden.size() <= 1, "model.hidden", "at most one hidden layer is supported");
  for (std::size_t i = 0; i < c.hidden.size(); ++i) v.require(c.hidden[i] > 0, index("model.hidden", i), "must be positive");
  if (c.layer_dims) {
    const auto& dims = *c.layer_dims;
    v.require(dims.size() == 2 || dims.size() == 3, "model.layer_dims",
              "must list input, optional hidden, and class dims (2 or 3 entries)");
    for (std::size_t i = 0; i < dims.size(); ++i) v.require(dims[i] > 0, index("model.layer_dims", i), "must be positive");
    v.require(c.hidden.empty(), "model", "give either hidden or layer_dims, not both");
    if (!dims.empty()) v.require(dims.back() == c.data.classes, "model.layer_dims", "last dim must equal data.classes");
    if (!dims.empty() && c.data.source == DataSource::Synthetic)
      v.require(dims.front() == static_cast<int>(c.data.features), "model.layer_dims",
                "first dim must equal data.features");
  }

  const auto& d = c.data;
  v.require(d.classes >= 2, "data.classes", "at least two classes are required");
  v.require(d.test_fraction > 0.0 && d.test_fraction < 1.0, "data.test_fraction", "must be in (0, 1)");
  if (d.source == DataSource::Synthetic) {
    v.require(d.features >= 1, "data.features", "must be at least 1");
    v.require(d.rows >= static_cast<std::size_t>(std::max(d.classes, 1)), "data.rows", "must be at least data.classes");
    v.require(std::isfinite(d.separation) && d.separation >= 0.0, "data.separation", "must be non-negative");
    if (d.separation > 0.0)
      v.require(d.features >= static_cast<std::size_t>(std::max(d.classes, 0)), "data.features",
                "must be at least data.classes when separation > 0");
  } else {
    v.require(!d.path.empty(), "data.path", "required for csv data");
  }
  if (c.partition.kind == PartitionKind::Dirichlet) {
    v.require(positive(c.partition.alpha), "partition.alpha", "must be positive");
    v.require(n >= 2, "partition.kind", "dirichlet partitioning needs at least two devices");
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& dev = c.devices[i];
    const auto p = index("devices", i);
    v.require(positive(dev.speed_factor), join(p, "speed_factor"), "must be positive");
    v.require(dev.ram_mb >= 1, join(p, "ram_mb"), "must be at least 1");
    v.require(positive(dev.bandwidth_cap), join(p, "bandwidth_cap"), "must be positive");
    if (dev.adversary.kind == AdversaryKind::NoiseInjection)
      v.require(positive(dev.adversary.sigma), join(p, "adversary.sigma"), "must be positive for noise_injection");
    if (dev.adversary.kind == AdversaryKind::FgsmEval)
      v.require(positive(dev.adversary.epsilon), join(p, "adversary.epsilon"), "must be positive for fgsm_eval");
    if (dev.position && c.channel.mode == ChannelMode::Wireless)
      v.require(c.wireless.arena.contains(*dev.position), join(p, "position"), "outside the arena");
  }

  const auto& t = c.topology;
  if (t.kind == TopologyKind::Explicit) check_edges(v, t.edges, n, "topology.edges");
  if (t.kind == TopologyKind::Star) v.require(t.center < n, "topology.center", "not a valid device index");
  if (t.kind == TopologyKind::RandomRegular && n >= 1) {
    v.require(t.degree >= 1 && t.degree < n, "topology.degree", "must be in [1, devices-1]");
    v.require((n * t.degree) % 2 == 0, "topology.degree", "devices * degree must be even");
  }
  if (t.edge_cap_range)
    v.require(positive(t.edge_cap_range->first) && t.edge_cap_range->first <= t.edge_cap_range->second &&
                  std::isfinite(t.edge_cap_range->second),
              "topology.edge_cap_range", "needs 0 < low <= high");

  if (c.mode == RunMode::Centralized) {
    v.require(c.aggregator < n, "aggregator", "not a valid device index");
    v.require(c.aggregation.kind != AggregationKind::GossipPush, "aggregation.kind",
              "gossip_push requires mode p2p");
    v.require(c.aggregation.send_edges.empty(), "aggregation.send_edges", "only used in mode p2p");
  }
  if (c.aggregation.kind == AggregationKind::GossipPush) {
    v.require(c.aggregation.fanout >= 1, "aggregation.fanout", "must be at least 1");
    v.require(c.aggregation.send_edges.empty(), "aggregation.send_edges", "not used with gossip_push");
  }
  check_edges(v, c.aggregation.send_edges, n, "aggregation.send_edges");

  const auto& ch = c.channel;
  v.require(positive(ch.rate), "channel.rate", "must be positive");
  v.require(std::isfinite(ch.delay) && ch.delay >= 0.0, "channel.delay", "must be non-negative");
  v.require(ch.loss >= 0.0 && ch.loss < 1.0, "channel.loss", "must be in [0, 1)");
  v.require(ch.mtu >= 1, "channel.mtu", "must be at least 1 bit");

  if (ch.mode == ChannelMode::Wireless) {
    const auto& w = c.wireless;
    v.require(positive(w.arena.width) && positive(w.arena.height), "wireless.arena", "dimensions must be positive");
    v.require(!w.access_points.empty(), "wireless.access_points", "wireless mode needs at least one access point");
    std::set<int> ids;
    for (std::size_t i = 0; i < w.access_points.size(); ++i) {
      const auto& ap = w.access_points[i];
      const auto p = index("wireless.access_points", i);
      v.require(ids.insert(ap.id).second, join(p, "id"), "duplicate access point id");
      v.require(w.arena.contains(ap.position), p, "outside the arena");
      v.require(positive(ap.backbone_rate), join(p, "backbone_rate"), "must be positive");
    }
    v.require(!w.tiers.empty(), "wireless.tiers", "at least one rate tier is required");
    for (std::size_t i = 0; i < w.tiers.size(); ++i) {
      v.require(positive(w.tiers[i].rate_bps), index("wireless.tiers", i), "rate must be positive");
      if (i > 0) {
        v.require(w.tiers[i].max_loss_db > w.tiers[i - 1].max_loss_db, index("wireless.tiers", i),
                  "tiers must be sorted by ascending loss threshold");
        v.require(w.tiers[i].rate_bps < w.tiers[i - 1].rate_bps, index("wireless.tiers", i),
                  "tier rates must strictly decrease");
      }
    }
    v.require(positive(w.floor_rate), "wireless.floor_rate", "must be positive");
    v.require(std::isfinite(w.path_loss.exponent) && w.path_loss.exponent >= 1.0, "wireless.path_loss.exponent",
              "must be at least 1");
    v.require(positive(w.path_loss.ref_dist), "wireless.path_loss.ref_dist", "must be positive");
    v.require(std::isfinite(w.speed) && w.speed >= 0.0, "wireless.speed", "must be non-negative");
    v.require(positive(w.tick), "wireless.tick", "must be positive");
  }

  if (c.early_stop.enabled) {
    v.require(c.early_stop.patience >= 1, "early_stop.patience", "must be at least 1");
    v.require(std::isfinite(c.early_stop.min_delta) && c.early_stop.min_delta >= 0.0, "early_stop.min_delta",
              "must be non-negative");
  }
  v.require(positive(c.timing.base_seconds_per_row), "timing.base_seconds_per_row", "must be positive");
  v.require(positive(c.timing.accelerator_speedup), "timing.accelerator_speedup", "must be positive");
  v.require(c.timing.rows_per_mb >= 1, "timing.rows_per_mb", "must be at least 1");

  if (!v.empty()) return v.take();

  // Structural checks that need the generated pieces: connectivity, data
  // loading, shard sizes. Building them here is what guarantees that a valid
  // config never fails at startup.
  try {
    const TopologyGraph g = build_topology(c);
    if (const auto pair = g.find_unreachable_pair())
      v.add("topology", "no path between device " + std::to_string(pair->first) + " and device " +
                            std::to_string(pair->second));
    for (std::size_t i = 0; i < c.aggregation.send_edges.size(); ++i) {
      const auto& [a, b] = c.aggregation.send_edges[i];
      v.require(g.connected(a, b), index("aggregation.send_edges", i), "not an edge of the topology");
    }
  } catch (const std::exception& e) {
    v.add("topology", e.what());
  }
  try {
    (void)build_datasets(c);
  } catch (const std::exception& e) {
    v.add("data", e.what());
  }
  return v.take();
}

}  // namespace peerfl
