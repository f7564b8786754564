#pragma once

#include "lrcc/common.hpp"
#include "lrcc/graph.hpp"

#include <vector>

namespace lrcc {

// ---- l2 block soft-thresholding ---------------------------------------------

/// Prox of eta*||.||_2: u * max(0, 1 - eta/||u||).
Vec block_soft_threshold(const Eigen::Ref<const Vec>& u, double eta);

/// One element of the Clarke Jacobian of block_soft_threshold at u.
///
/// At the kink ||u|| == eta the element with t = 0 (the zero map) is chosen.
/// eta == 0 gives the identity.
class BlockThresholdJacobian {
 public:
  enum class Case { Outside, Boundary, Inside };

  BlockThresholdJacobian() = default;
  BlockThresholdJacobian(const Eigen::Ref<const Vec>& u, double eta);

  Case which() const { return case_; }
  double boundary_t() const { return 0.0; }
  bool is_zero() const { return case_ != Case::Outside; }

  /// out = J * dir. `out` may alias nothing else.
  void apply(const Eigen::Ref<const Vec>& dir, Eigen::Ref<Vec> out) const;
  Vec apply(const Eigen::Ref<const Vec>& dir) const;
  /// acc += diag(I - J).
  void add_complement_diagonal(Eigen::Ref<Vec> acc) const;

 private:
  Case case_ = Case::Inside;
  Vec u_;
  double norm_ = 0.0;
  double eta_ = 0.0;
};

BlockThresholdJacobian block_soft_threshold_jacobian(const Eigen::Ref<const Vec>& u, double eta);

// ---- singular value thresholding -----------------------------------------------

/// Full SVD G = U [Diag(sigma); 0] V^T of a d1 x d2 block (d1 >= d2) plus the
/// threshold it was shrunk by.
struct SvtFactorization {
  Mat u;      ///< d1 x d1, columns [U1 U2]
  Mat v;      ///< d2 x d2
  Vec sigma;  ///< d2, nonincreasing
  double gamma = 0.0;

  Index d1() const { return u.rows(); }
  Index d2() const { return v.rows(); }
  auto u1() const { return u.leftCols(v.rows()); }
  auto u2() const { return u.rightCols(u.rows() - v.rows()); }
};

struct SvtResult {
  Mat value;
  SvtFactorization factorization;
};

/// Prox of gamma*||.||_* at G: singular values shrunk to (sigma - gamma)_+.
SvtResult svt(const Eigen::Ref<const Mat>& g, double gamma);

/// Nuclear norm via singular values only.
double nuclear_norm(const Eigen::Ref<const Mat>& g);
double spectral_norm(const Eigen::Ref<const Mat>& g);

/// An element of the Clarke Jacobian of the SVT map, built from the cached
/// factorization. Index groups: alpha1 = {sigma > gamma}, alpha2 = {sigma ==
/// gamma} (within 1e-12 max(1, sigma_1)), alpha3 = {sigma < gamma}.
class NuclearJacobian {
 public:
  NuclearJacobian() = default;
  explicit NuclearJacobian(SvtFactorization fact);

  const SvtFactorization& factorization() const { return fact_; }
  const std::vector<Index>& alpha1() const { return alpha1_; }
  const std::vector<Index>& alpha2() const { return alpha2_; }
  const std::vector<Index>& alpha3() const { return alpha3_; }

  /// d2 x d2 coefficients applied to the symmetric part of U1^T W V.
  const Mat& gamma_sym() const { return gamma_sym_; }
  /// d2 x d2 coefficients applied to the skew part of U1^T W V.
  const Mat& gamma_skew() const { return gamma_skew_; }
  /// (d1-d2) x d2 coefficients applied to U2^T W V.
  const Mat& gamma_perp() const { return gamma_perp_; }

  bool is_zero() const { return alpha1_.empty(); }

  Mat apply(const Eigen::Ref<const Mat>& w) const;
  /// Trace of the operator on R^{d1 x d2}.
  double trace() const;

 private:
  SvtFactorization fact_;
  std::vector<Index> alpha1_, alpha2_, alpha3_;
  Mat gamma_sym_, gamma_skew_, gamma_perp_;
};

NuclearJacobian nuclear_jacobian(const SvtFactorization& fact);
Mat apply_nuclear_jacobian(const NuclearJacobian& jac, const Eigen::Ref<const Mat>& w);

// ---- separable prox maps of g and h ------------------------------------------------

/// Blockwise prox of nu*g: edge block l thresholded at nu*gamma1*w_l.
Vec prox_g(const Vec& y, double nu, const WeightedGraph& graph, double gamma1);

/// Per-sample prox of nu*h: SVT at nu*gamma2 after reshaping block i to d1 x d2.
Vec prox_h(const Vec& z, double nu, Index d1, Index d2, double gamma2);

}  // namespace lrcc
