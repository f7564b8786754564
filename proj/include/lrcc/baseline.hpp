#pragma once

#include "lrcc/common.hpp"
#include "lrcc/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lrcc {

enum class LloydInit { RandomAssignment, Spectral };
std::string to_string(LloydInit init);
LloydInit parse_lloyd_init(const std::string& name);

struct LloydOptions {
  int k = 2;
  Index rank = 1;
  int max_iter = 100;
  LloydInit init = LloydInit::RandomAssignment;
  std::uint64_t seed = 0;
};

struct LloydResult {
  std::vector<int> labels;
  std::vector<RowMat> centroids;
  int iterations = 0;
  bool converged = false;
  /// sum_i ||A_i - C_{s_i}||_F^2 after the initial centroid fit and after
  /// every iteration.
  std::vector<double> objective;
};

/// Best rank-r approximation (truncated SVD).
RowMat truncate_rank(const Eigen::Ref<const RowMat>& m, Index r);

/// Lloyd iterations whose centroid step keeps only the top r singular
/// triplets of each cluster mean.
LloydResult lr_lloyd(const ObservationSet& obs, const LloydOptions& options);

/// k-means on the top principal scores of the vectorized samples. Not the
/// tensor spectral initialization used in the literature.
std::vector<int> spectral_init(const ObservationSet& obs, int k, Index rank, std::uint64_t seed);

}  // namespace lrcc
