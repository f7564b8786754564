#include "lrcc/prox.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace lrcc {

Vec block_soft_threshold(const Eigen::Ref<const Vec>& u, double eta) {
  const double norm = u.norm();
  if (norm <= eta || norm == 0.0) return Vec::Zero(u.size());
  return (1.0 - eta / norm) * u;
}

BlockThresholdJacobian::BlockThresholdJacobian(const Eigen::Ref<const Vec>& u, double eta)
    : u_(u), norm_(u.norm()), eta_(eta) {
  if (eta == 0.0) {
    case_ = Case::Outside;
  } else if (std::abs(norm_ - eta) <= 1e-12 * std::max(norm_, eta)) {
    case_ = Case::Boundary;
  } else {
    case_ = norm_ > eta ? Case::Outside : Case::Inside;
  }
  if (case_ != Case::Outside) u_.resize(0);
}

void BlockThresholdJacobian::apply(const Eigen::Ref<const Vec>& dir, Eigen::Ref<Vec> out) const {
  if (case_ != Case::Outside) {
    out.setZero();
    return;
  }
  if (eta_ == 0.0) {
    out = dir;
    return;
  }
  const double scale = 1.0 - eta_ / norm_;
  const double proj = eta_ * u_.dot(dir) / (norm_ * norm_ * norm_);
  out = scale * dir + proj * u_;
}

Vec BlockThresholdJacobian::apply(const Eigen::Ref<const Vec>& dir) const {
  Vec out(dir.size());
  apply(dir, out);
  return out;
}

void BlockThresholdJacobian::add_complement_diagonal(Eigen::Ref<Vec> acc) const {
  if (case_ != Case::Outside) {
    acc.array() += 1.0;
    return;
  }
  if (eta_ == 0.0) return;
  const double n3 = norm_ * norm_ * norm_;
  acc.array() += eta_ / norm_ - eta_ * u_.array().square() / n3;
}

BlockThresholdJacobian block_soft_threshold_jacobian(const Eigen::Ref<const Vec>& u, double eta) {
  return BlockThresholdJacobian(u, eta);
}

SvtResult svt(const Eigen::Ref<const Mat>& g, double gamma) {
  require_shape(g.rows() >= g.cols(), "svt expects d1 >= d2");
  if (!g.allFinite()) throw std::domain_error("svt: non-finite input");
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvtResult out;
  out.factorization.u = svd.matrixU();
  out.factorization.v = svd.matrixV();
  out.factorization.sigma = svd.singularValues();
  out.factorization.gamma = gamma;
  const Index d2 = g.cols();
  const Vec shrunk = (out.factorization.sigma.array() - gamma).max(0.0).matrix();
  out.value = out.factorization.u.leftCols(d2) * shrunk.asDiagonal() * out.factorization.v.transpose();
  return out;
}

double nuclear_norm(const Eigen::Ref<const Mat>& g) {
  return Eigen::JacobiSVD<Mat>(g).singularValues().sum();
}

double spectral_norm(const Eigen::Ref<const Mat>& g) {
  const auto s = Eigen::JacobiSVD<Mat>(g).singularValues();
  return s.size() > 0 ? s(0) : 0.0;
}

NuclearJacobian::NuclearJacobian(SvtFactorization fact) : fact_(std::move(fact)) {
  const Index d1 = fact_.d1();
  const Index d2 = fact_.d2();
  const Vec& s = fact_.sigma;
  const double gamma = fact_.gamma;
  const double tie = 1e-12 * std::max(1.0, d2 > 0 ? s(0) : 0.0);

  enum Group { kAbove, kAt, kBelow };
  std::vector<Group> group(static_cast<std::size_t>(d2));
  for (Index i = 0; i < d2; ++i) {
    if (std::abs(s(i) - gamma) <= tie) {
      group[static_cast<std::size_t>(i)] = kAt;
      alpha2_.push_back(i);
    } else if (s(i) > gamma) {
      group[static_cast<std::size_t>(i)] = kAbove;
      alpha1_.push_back(i);
    } else {
      group[static_cast<std::size_t>(i)] = kBelow;
      alpha3_.push_back(i);
    }
  }

  constexpr double kFloor = 1e-300;
  auto pos = [](double t) { return t > 0.0 ? t : 0.0; };
  gamma_sym_ = Mat::Zero(d2, d2);
  gamma_skew_ = Mat::Zero(d2, d2);
  gamma_perp_ = Mat::Zero(d1 - d2, d2);
  for (Index i : alpha1_) {
    for (Index j = 0; j < d2; ++j) {
      const Group gj = group[static_cast<std::size_t>(j)];
      double sym = 1.0;
      if (gj == kBelow) sym = (s(i) - gamma) / std::max(s(i) - s(j), kFloor);
      gamma_sym_(i, j) = sym;
      gamma_sym_(j, i) = sym;
      const double skew = (s(i) - gamma + pos(s(j) - gamma)) / std::max(s(i) + s(j), kFloor);
      gamma_skew_(i, j) = skew;
      gamma_skew_(j, i) = skew;
    }
    const double mu = (s(i) - gamma) / std::max(s(i), kFloor);
    gamma_perp_.col(i).setConstant(mu);
  }
}

Mat NuclearJacobian::apply(const Eigen::Ref<const Mat>& w) const {
  const Index d1 = fact_.d1();
  const Index d2 = fact_.d2();
  require_shape(w.rows() == d1 && w.cols() == d2, "nuclear Jacobian: direction shape mismatch");
  if (alpha1_.empty()) return Mat::Zero(d1, d2);
  const Mat wv = w * fact_.v;
  const Mat w1 = fact_.u1().transpose() * wv;
  Mat core = gamma_sym_.cwiseProduct(0.5 * (w1 + w1.transpose())) +
             gamma_skew_.cwiseProduct(0.5 * (w1 - w1.transpose()));
  Mat r = fact_.u1() * core;
  if (d1 > d2) {
    const Mat w2 = fact_.u2().transpose() * wv;
    r.noalias() += fact_.u2() * gamma_perp_.cwiseProduct(w2);
  }
  return r * fact_.v.transpose();
}

double NuclearJacobian::trace() const {
  const Index d2 = fact_.d2();
  double t = gamma_perp_.sum();
  for (Index i = 0; i < d2; ++i) {
    for (Index j = 0; j < d2; ++j) {
      t += i == j ? gamma_sym_(i, i) : 0.5 * (gamma_sym_(i, j) + gamma_skew_(i, j));
    }
  }
  return t;
}

NuclearJacobian nuclear_jacobian(const SvtFactorization& fact) { return NuclearJacobian(fact); }

Mat apply_nuclear_jacobian(const NuclearJacobian& jac, const Eigen::Ref<const Mat>& w) { return jac.apply(w); }

Vec prox_g(const Vec& y, double nu, const WeightedGraph& graph, double gamma1) {
  const Index edges = graph.num_edges();
  require_shape(edges > 0 ? y.size() % edges == 0 : y.size() == 0, "prox_g: y length must be d*|E|");
  if (edges == 0) return y;
  const Index d = y.size() / edges;
  Vec out(y.size());
  for (Index l = 0; l < edges; ++l) {
    out.segment(l * d, d) = block_soft_threshold(y.segment(l * d, d), nu * gamma1 * graph.edge(l).weight);
  }
  return out;
}

Vec prox_h(const Vec& z, double nu, Index d1, Index d2, double gamma2) {
  const Index d = d1 * d2;
  require_shape(d > 0 && z.size() % d == 0, "prox_h: z length must be d1*d2*n");
  require_shape(d1 >= d2, "prox_h expects d1 >= d2");
  const double thresh = nu * gamma2;
  if (thresh == 0.0) return z;
  Vec out(z.size());
  for (Index i = 0; i < z.size() / d; ++i) {
    const Mat block = MatView(z.data() + i * d, d1, d2);
    MatMutView(out.data() + i * d, d1, d2) = svt(block, thresh).value;
  }
  return out;
}

}  // namespace lrcc
