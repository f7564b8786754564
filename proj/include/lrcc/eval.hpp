#pragma once

#include "lrcc/common.hpp"
#include "lrcc/dataset.hpp"

#include <cstdint>
#include <vector>

namespace lrcc {

/// Cross-tabulation of two labelings. Label values may be arbitrary ints;
/// rows and columns follow order of first appearance.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> rows;
  std::vector<std::int64_t> cols;
  std::int64_t total = 0;

  static ContingencyTable build(const std::vector<int>& a, const std::vector<int>& b);
  /// True when the two labelings are the same partition up to renaming.
  bool is_matching() const;
};

/// Adjusted Rand index (Hubert-Arabie).
double ari(const std::vector<int>& a, const std::vector<int>& b);

/// Mutual information over the arithmetic mean of the two entropies (nats).
/// A partition with a single cluster scores 0 against anything but an
/// identical partition.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

/// Principal-component scores (n x dims) of the vectorized, centred samples.
/// Each direction is signed so that its largest-magnitude loading is positive.
Mat pca_embed(const ObservationSet& obs, Index dims = 2);

}  // namespace lrcc
