#pragma once

#include <vector>

#include "config.hpp"
#include "learning.hpp"
#include "net.hpp"

namespace peerfl {

/// Concrete data for a run: the held-out test split plus each device's
/// train and validation shards (label-flipping adversaries already applied).
struct DataBundle {
  ModelShape shape;
  Dataset test;
  std::vector<Dataset> train;
  std::vector<Dataset> validation;
};

/// Shape from explicit layer_dims, or [features, hidden..., classes].
ModelShape model_shape(const SimConfig& cfg, std::size_t features);

/// Throws ConfigError / FormatError when the data cannot be produced.
DataBundle build_datasets(const SimConfig& cfg);

/// Seeded overlay generation with edge capacities applied.
TopologyGraph build_topology(const SimConfig& cfg);

}  // namespace peerfl
