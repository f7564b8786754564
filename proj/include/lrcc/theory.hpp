#pragma once

#include "lrcc/common.hpp"
#include "lrcc/dataset.hpp"
#include "lrcc/graph.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lrcc {

/// Per-class Frobenius means, one per label value.
std::vector<RowMat> cluster_means(const ObservationSet& obs, const LabelVector& labels);

enum class Region { Perfect, MergeOnly, DistinguishOnly, Neither };
std::string to_string(Region region);

struct PairEta {
  Index i = 0;
  Index j = 0;
  double eta = 0.0;
};

/// Exact-recovery quantities for a labelled instance, plus flags for one
/// queried (gamma1, gamma2).
struct RecoveryReport {
  Index num_clusters = 0;
  Index d2 = 0;
  std::vector<RowMat> means;
  std::vector<Index> sizes;
  /// Minimum pairwise distance between class means; empty when K < 2.
  std::optional<double> delta;
  bool means_distinct = false;
  std::vector<bool> clique;
  /// eta_ij over every within-class pair i < j.
  std::vector<PairEta> eta;
  std::vector<double> eta_max;
  bool condition_a = false;
  /// +inf when condition (a) fails.
  double gamma1_min = 0.0;
  double w_max = 0.0;

  double gamma1 = 0.0;
  double gamma2 = 0.0;
  bool condition_b = false;
  /// Empty when K < 2.
  std::optional<bool> condition_c;
  std::optional<Region> region;
};

RecoveryReport recovery_check(const ObservationSet& obs, const LabelVector& labels, const WeightedGraph& graph,
                              double gamma1, double gamma2);

/// Region of (gamma1, gamma2) for an existing report. Throws when K < 2.
Region region_classify(const RecoveryReport& report, double gamma1, double gamma2);

/// CDF of the chi distribution with d degrees of freedom: P(d/2, t^2/2).
double chi_cdf(double t, double d);
/// Regularized lower incomplete gamma function P(a, x).
double regularized_gamma_p(double a, double x);

struct DistinguishPair {
  Index alpha = 0;
  Index beta = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double probability = 0.0;
};

struct AsymptoticReport {
  double t = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;
  Index n = 0;
  Index d = 0;
  double chi_cdf = 0.0;
  std::vector<double> pi_hat;
  std::vector<std::vector<Index>> members;
  std::vector<bool> clique;
  std::vector<double> eta_max;
  /// (F(t; d) pi_alpha - epsilon) n
  std::vector<double> capacity;
  std::vector<bool> condition_a1;
  /// Smallest gamma1 allowed by (b1); +inf when (a1) fails.
  std::vector<double> gamma1_bound;
  std::vector<bool> condition_b1;
  std::vector<double> merge_probability;
  double w_tilde_max = 0.0;
  std::vector<DistinguishPair> pairs;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::string note;
};

/// `means` are the true component means; pi is taken as the empirical class
/// frequencies. Throws unless 0 < epsilon < F(t; d) min pi.
AsymptoticReport asymptotic_check(const ObservationSet& obs, const LabelVector& labels,
                                  const std::vector<RowMat>& means, double sigma, const WeightedGraph& graph,
                                  double t, double epsilon, double gamma1, double gamma2);

struct PredictionBoundReport {
  Index n = 0;
  Index d = 0;
  Index num_edges = 0;
  Index components = 0;
  double sigma = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double sigma_min_B = 0.0;
  double gamma1_threshold = 0.0;
  bool gamma1_above_threshold = false;
  double variance_term = 0.0;
  double group_term = 0.0;
  double nuclear_term = 0.0;
  double rhs = 0.0;
  std::optional<double> lhs;
  std::optional<bool> holds;
  double consistency = 0.0;
  double min_weight = 0.0;
  bool weight_assumption = false;
};

/// Right-hand side of the finite-sample prediction bound at the true stacked
/// centroids x0; the left-hand side is filled in when `x_hat` is given.
PredictionBoundReport prediction_bound(const Vec& x0, const WeightedGraph& graph, double sigma, double gamma1,
                                       double gamma2, Index d1, Index d2, const Vec* x_hat = nullptr);

nlohmann::json to_json(const RecoveryReport& report);
nlohmann::json to_json(const AsymptoticReport& report);
nlohmann::json to_json(const PredictionBoundReport& report);

}  // namespace lrcc
