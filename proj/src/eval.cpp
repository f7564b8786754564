#include "lrcc/eval.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace lrcc {

namespace {

std::vector<int> dense_ids(const std::vector<int>& raw, std::size_t& k) {
  std::vector<int> out;
  out.reserve(raw.size());
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (!raw.empty() && *lo >= 0 && static_cast<std::size_t>(*hi) < 4 * raw.size() + 16) {
    std::vector<int> id(static_cast<std::size_t>(*hi) + 1, -1);
    k = 0;
    for (int v : raw) {
      int& slot = id[static_cast<std::size_t>(v)];
      if (slot < 0) slot = static_cast<int>(k++);
      out.push_back(slot);
    }
    return out;
  }
  std::unordered_map<int, int> id;
  for (int v : raw) {
    auto [it, inserted] = id.try_emplace(v, static_cast<int>(id.size()));
    out.push_back(it->second);
  }
  k = id.size();
  return out;
}

double choose2(std::int64_t m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); }

}  // namespace

ContingencyTable ContingencyTable::build(const std::vector<int>& a, const std::vector<int>& b) {
  require_shape(a.size() == b.size(), "labelings must have equal length");
  std::size_t ka = 0, kb = 0;
  const auto ia = dense_ids(a, ka);
  const auto ib = dense_ids(b, kb);
  ContingencyTable t;
  t.counts.assign(ka, std::vector<std::int64_t>(kb, 0));
  t.rows.assign(ka, 0);
  t.cols.assign(kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++t.counts[static_cast<std::size_t>(ia[i])][static_cast<std::size_t>(ib[i])];
    ++t.rows[static_cast<std::size_t>(ia[i])];
    ++t.cols[static_cast<std::size_t>(ib[i])];
  }
  t.total = static_cast<std::int64_t>(a.size());
  return t;
}

bool ContingencyTable::is_matching() const {
  if (rows.size() != cols.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int nonzero = 0;
    for (std::int64_t c : counts[i]) nonzero += c > 0;
    if (nonzero != 1) return false;
  }
  return true;
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  const ContingencyTable t = ContingencyTable::build(a, b);
  if (t.is_matching()) return 1.0;
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& row : t.counts)
    for (std::int64_t c : row) index += choose2(c);
  for (std::int64_t r : t.rows) sa += choose2(r);
  for (std::int64_t c : t.cols) sb += choose2(c);
  const double expected = sa * sb / choose2(t.total);
  const double max = 0.5 * (sa + sb);
  if (max == expected) return 1.0;
  return (index - expected) / (max - expected);
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const ContingencyTable t = ContingencyTable::build(a, b);
  if (t.is_matching()) return 1.0;
  const double n = static_cast<double>(t.total);
  auto entropy = [n](const std::vector<std::int64_t>& m) {
    double h = 0.0;
    for (std::int64_t c : m) {
      if (c > 0) h -= static_cast<double>(c) / n * std::log(static_cast<double>(c) / n);
    }
    return h;
  };
  const double ha = entropy(t.rows);
  const double hb = entropy(t.cols);
  if (ha == 0.0 || hb == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.cols.size(); ++j) {
      const double c = static_cast<double>(t.counts[i][j]);
      if (c > 0.0) {
        mi += c / n * std::log(n * c / (static_cast<double>(t.rows[i]) * static_cast<double>(t.cols[j])));
      }
    }
  }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

Mat pca_embed(const ObservationSet& obs, Index dims) {
  const Index d = obs.dim();
  const Index n = obs.n();
  if (dims < 1 || dims > d) throw std::invalid_argument("pca_embed: dims must lie in [1, d1*d2]");
  Mat x(n, d);
  for (Index i = 0; i < n; ++i) x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(obs.data().data() + i * d, d);
  x.rowwise() -= x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Mat> eig(x.transpose() * x);
  Mat dirs(d, dims);
  for (Index c = 0; c < dims; ++c) {
    Vec v = eig.eigenvectors().col(d - 1 - c);
    Index arg = 0;
    for (Index r = 1; r < d; ++r) {
      if (std::abs(v(r)) > std::abs(v(arg))) arg = r;
    }
    if (v(arg) < 0.0) v = -v;
    dirs.col(c) = v;
  }
  return x * dirs;
}

}  // namespace lrcc
