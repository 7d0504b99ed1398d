#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "learning.hpp"

namespace peerfl {

/// Per-device row indices into a parent Dataset. Disjoint, covering, and
/// every shard non-empty.
struct PartitionPlan {
  std::vector<std::vector<std::size_t>> assignments;

  std::size_t devices() const { return assignments.size(); }
  /// Throws std::logic_error if the plan is not a partition of [0, rows).
  void check(std::size_t rows) const;
};

/// Unit-variance Gaussian blobs, class c centred at separation * e_c.
/// Row i has label i % classes, so class counts differ by at most one.
Dataset make_synthetic(std::size_t rows, std::size_t features, int classes, double separation,
                       std::uint64_t seed);

/// Seeded shuffle, then contiguous near-equal shards (sizes differ by <= 1).
PartitionPlan partition_iid(const Dataset& data, std::size_t devices, std::uint64_t seed);

/// Per-class Dirichlet(alpha) proportions over devices. Empty shards take one
/// row from the largest shard.
PartitionPlan partition_dirichlet(const Dataset& data, std::size_t devices, double alpha,
                                  std::uint64_t seed);

/// Header row required; every column except `label_column` is a numeric
/// feature. Throws FormatError naming the file row on bad input.
Dataset load_csv(const std::string& path, const std::string& label_column, int classes);

struct IndexSplit {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> held_out;
};

/// Seeded shuffle of [0, n) holding out floor(n * fraction) rows, never all of them.
IndexSplit split_indices(std::size_t n, double fraction, std::uint64_t seed);

}  // namespace peerfl
