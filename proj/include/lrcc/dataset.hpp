#pragma once

#include "lrcc/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lrcc {

/// n matrices of shape d1 x d2, each stored row-major, back to back.
///
/// Construction enforces finiteness and the d1 >= d2 convention: inputs with
/// d1 < d2 are transposed block by block and `transposed()` reports it.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(Index n, Index d1, Index d2, std::vector<double> data);

  Index n() const { return n_; }
  Index d1() const { return d1_; }
  Index d2() const { return d2_; }
  Index dim() const { return d1_ * d2_; }
  bool transposed() const { return transposed_; }

  const std::vector<double>& data() const { return data_; }
  MatView matrix(Index i) const { return MatView(data_.data() + i * dim(), d1_, d2_); }

  /// Samples stacked into one vector of length dim() * n().
  Eigen::Map<const Vec> stacked() const {
    return Eigen::Map<const Vec>(data_.data(), static_cast<Index>(data_.size()));
  }

  static ObservationSet from_stacked(const Vec& x, Index d1, Index d2);

 private:
  Index n_ = 0;
  Index d1_ = 0;
  Index d2_ = 0;
  bool transposed_ = false;
  std::vector<double> data_;
};

/// Labels in [0, K-1] with every class nonempty.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<int> labels);

  Index size() const { return static_cast<Index>(labels_.size()); }
  int num_classes() const { return k_; }
  int operator[](Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& values() const { return labels_; }

  /// Relabels arbitrary integer ids to 0..K-1 in order of first appearance.
  static LabelVector compact(const std::vector<int>& raw);

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

struct MixtureSpec {
  std::vector<RowMat> means;
  std::vector<double> weights;
  double noise = 0.0;
  std::vector<Index> ranks;

  Index num_components() const { return static_cast<Index>(means.size()); }
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct LabeledData {
  ObservationSet observations;
  LabelVector labels;
};

// ---- file formats --------------------------------------------------------

class DataFormatError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, Truncated, NonFinite, Parse, EmptySet };
  DataFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void save_mts(const ObservationSet& obs, const std::filesystem::path& path);
ObservationSet load_mts(const std::filesystem::path& path);

/// In-memory MTS1 encoding, shared by save_mts and the manifest hash.
std::vector<std::uint8_t> encode_mts(const ObservationSet& obs);
ObservationSet decode_mts(const std::vector<std::uint8_t>& bytes);

ObservationSet load_csv(const std::filesystem::path& path, Index d1, Index d2);

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);
std::vector<int> load_labels(const std::filesystem::path& path);

// ---- generators ----------------------------------------------------------

/// Top-r left and right singular vectors of a d1 x d2 standard Gaussian matrix.
std::pair<Mat, Mat> random_singular_factors(Index d1, Index d2, Index r, std::uint64_t seed);

/// Singular-value triple of one quarter-sphere sample before noise.
Eigen::Vector3d quarter_sphere_point(double theta, double vartheta);
Eigen::Vector3d reflected_quarter_sphere_point(double theta, double vartheta);

struct QuarterSphereOptions {
  Index n_per_cluster = 100;
  Index d1 = 20;
  Index d2 = 10;
  double noise = 0.1;
  bool share_factors = false;
};
LabeledData gen_quarter_spheres(const QuarterSphereOptions& opts, std::uint64_t seed);

/// Singular values of the eight unbalanced-Gaussian centroids, one column each.
const Eigen::Matrix<double, 2, 8>& unbalanced_centroid_values();

LabeledData gen_unbalanced_gaussian(const std::vector<Index>& sizes, Index d1, Index d2,
                                    double noise, std::uint64_t seed);

LabeledData gen_low_rank_mixture(const MixtureSpec& spec, Index n, std::uint64_t seed);

/// Four rank-2 clusters with N(0,1) singular values, used to illustrate the
/// (gamma1, gamma2) recovery regions.
struct RecoveryRecipe {
  Index clusters = 4;
  Index per_cluster = 50;
  Index d1 = 20;
  Index d2 = 10;
  Index rank = 2;
  double noise = 0.1;
};
struct RecoveryData {
  LabeledData data;
  std::vector<RowMat> means;
};
RecoveryData gen_recovery_recipe(const RecoveryRecipe& recipe, std::uint64_t seed);

}  // namespace lrcc
