#include "scenario.hpp"

#include "datagen.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace peerfl {

ModelShape model_shape(const SimConfig& cfg, std::size_t features) {
  if (cfg.layer_dims) return ModelShape{*cfg.layer_dims};
  ModelShape shape;
  shape.layer_dims.push_back(static_cast<int>(features));
  shape.layer_dims.insert(shape.layer_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  shape.layer_dims.push_back(cfg.data.classes);
  return shape;
}

DataBundle build_datasets(const SimConfig& cfg) {
  const auto seed = static_cast<std::uint64_t>(cfg.seed);
  const std::size_t n = cfg.devices.size();
  const auto& spec = cfg.data;

  Dataset full;
  try {
    full = spec.source == DataSource::Synthetic
               ? make_synthetic(spec.rows, spec.features, spec.classes, spec.separation,
                                derive_seed(seed, Stream::Data))
               : load_csv(spec.path, spec.label_column, spec.classes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  DataBundle out;
  out.shape = model_shape(cfg, full.cols);
  if (out.shape.inputs() != static_cast<int>(full.cols))
    throw ConfigError("model input dim " + std::to_string(out.shape.inputs()) + " does not match " +
                      std::to_string(full.cols) + " data features");
  if (out.shape.classes() != full.classes) throw ConfigError("model class dim does not match data.classes");

  const IndexSplit test_split = split_indices(full.rows, spec.test_fraction, derive_seed(seed, Stream::Split, {0}));
  if (test_split.held_out.empty()) throw ConfigError("data.test_fraction leaves no test rows");
  out.test = full.subset(test_split.held_out);
  const Dataset pool = full.subset(test_split.kept);
  if (pool.rows < n)
    throw ConfigError("only " + std::to_string(pool.rows) + " training rows for " + std::to_string(n) + " devices");

  PartitionPlan plan;
  try {
    plan = cfg.partition.kind == PartitionKind::Iid
               ? partition_iid(pool, n, derive_seed(seed, Stream::Partition))
               : partition_dirichlet(pool, n, cfg.partition.alpha, derive_seed(seed, Stream::Partition));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("partition: ") + e.what());
  }

  for (std::size_t k = 0; k < n; ++k) {
    Dataset shard = pool.subset(plan.assignments[k]);
    if (cfg.devices[k].adversary.kind == AdversaryKind::LabelFlip) shard = flip_labels(std::move(shard));
    const IndexSplit vs = split_indices(shard.rows, cfg.validation_fraction, derive_seed(seed, Stream::Split, {k + 1}));
    out.train.push_back(shard.subset(vs.kept));
    out.validation.push_back(vs.held_out.empty() ? out.train.back() : shard.subset(vs.held_out));
  }
  return out;
}

TopologyGraph build_topology(const SimConfig& cfg) {
  const std::size_t n = cfg.devices.size();
  const double cap = cfg.channel.rate;
  const auto seed = static_cast<std::uint64_t>(cfg.seed);
  const auto& t = cfg.topology;
  TopologyGraph g;
  switch (t.kind) {
    case TopologyKind::Explicit: g = TopologyGraph::from_edges(n, t.edges, cap); break;
    case TopologyKind::Line: g = TopologyGraph::line(n, cap); break;
    case TopologyKind::Ring: g = TopologyGraph::ring(n, cap); break;
    case TopologyKind::Star:
      if (t.center >= n) throw ConfigError("star center out of range");
      g = TopologyGraph::star(n, cap, t.center);
      break;
    case TopologyKind::Complete: g = TopologyGraph::complete(n, cap); break;
    case TopologyKind::RandomRegular: {
      Rng rng = make_rng(seed, Stream::Topology);
      g = TopologyGraph::random_regular(n, t.degree, cap, rng);
      break;
    }
  }
  if (t.edge_cap_range) {
    Rng rng = make_rng(seed, Stream::EdgeCaps);
    std::uniform_real_distribution<double> u(t.edge_cap_range->first, t.edge_cap_range->second);
    for (const auto& [a, b] : g.edges()) g.set_edge_cap(a, b, u(rng));
  }
  return g;
}

}  // namespace peerfl
