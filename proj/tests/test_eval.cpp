#include "doctest.h"

#include "lrcc/eval.hpp"
#include "support.hpp"

#include <cmath>
#include <map>

using namespace lrcc;
using namespace lrcc::test;

namespace {

/// ARI from raw pair counts over all i < j.
double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0.0, in_a = 0.0, in_b = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
      pairs += 1.0;
    }
  }
  const double expected = in_a * in_b / pairs;
  const double max = 0.5 * (in_a + in_b);
  if (max == expected) return 1.0;
  return (both - expected) / (max - expected);
}

double entropy(const std::vector<int>& a) {
  std::map<int, double> c;
  for (int v : a) c[v] += 1.0;
  double h = 0.0;
  for (const auto& [_, m] : c) h -= m / a.size() * std::log(m / a.size());
  return h;
}

double joint_entropy(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> c;
  for (std::size_t i = 0; i < a.size(); ++i) c[{a[i], b[i]}] += 1.0;
  double h = 0.0;
  for (const auto& [_, m] : c) h -= m / a.size() * std::log(m / a.size());
  return h;
}

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> l(n);
  for (int& v : l) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return l;
}

}  // namespace

TEST_CASE("contingency table") {
  const auto t = ContingencyTable::build({5, 5, 9, 9, 9}, {1, 2, 2, 2, 2});
  CHECK(t.total == 5);
  CHECK(t.rows == std::vector<std::int64_t>{2, 3});
  CHECK(t.cols == std::vector<std::int64_t>{1, 4});
  CHECK(t.counts[0] == std::vector<std::int64_t>{1, 1});
  CHECK(t.counts[1] == std::vector<std::int64_t>{0, 3});
  CHECK_FALSE(t.is_matching());
  CHECK(ContingencyTable::build({0, 0, 1}, {7, 7, 3}).is_matching());
  CHECK_THROWS_AS(ContingencyTable::build({0, 1}, {0}), ShapeError);
}

TEST_CASE("ari examples") {
  CHECK(ari({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(ari({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5));
  CHECK(ari({0, 1, 2}, {0, 1, 2}) == 1.0);
  CHECK(ari({0, 0, 0}, {0, 0, 0}) == 1.0);
  CHECK(ari({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2}) == doctest::Approx(pair_counting_ari({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2})));
}

TEST_CASE("ari matches pair counting on random labelings") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    const auto a = random_labels(n, 1 + static_cast<int>(rng.below(4)), rng);
    const auto b = random_labels(n, 1 + static_cast<int>(rng.below(4)), rng);
    CHECK(ari(a, b) == doctest::Approx(pair_counting_ari(a, b)).epsilon(1e-12));
    CHECK(ari(a, b) == doctest::Approx(ari(b, a)).epsilon(1e-12));
    std::vector<int> renamed(a);
    for (int& v : renamed) v = 10 - 3 * v;
    CHECK(ari(renamed, b) == doctest::Approx(ari(a, b)).epsilon(1e-12));
    CHECK(ari(a, b) <= 1.0 + 1e-12);
  }
}

TEST_CASE("nmi") {
  CHECK(nmi({0, 0, 1, 1}, {4, 4, 2, 2}) == 1.0);
  CHECK(nmi({0, 0, 0, 0}, {0, 0, 1, 1}) == 0.0);
  CHECK(nmi({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.0).epsilon(1e-15));

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(20);
    const auto a = random_labels(n, 2 + static_cast<int>(rng.below(3)), rng);
    const auto b = random_labels(n, 2 + static_cast<int>(rng.below(3)), rng);
    const double ha = entropy(a), hb = entropy(b);
    if (ha == 0.0 || hb == 0.0) continue;
    const double mi = ha + hb - joint_entropy(a, b);
    const double expect = ContingencyTable::build(a, b).is_matching() ? 1.0 : std::max(0.0, mi / (0.5 * (ha + hb)));
    CHECK(nmi(a, b) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(nmi(a, b) == doctest::Approx(nmi(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("pca_embed") {
  // samples on a line: all variance lies in the first component
  std::vector<double> data;
  for (int i = 0; i < 10; ++i) {
    for (double x : {1.0, -2.0, 0.5, 3.0}) data.push_back(i * x);
  }
  const ObservationSet line(10, 2, 2, data);
  const Mat e = pca_embed(line);
  CHECK(e.rows() == 10);
  CHECK(e.cols() == 2);
  CHECK(e.col(1).norm() <= 1e-9 * e.col(0).norm());
  CHECK(std::abs(e.col(0).sum()) <= 1e-9);

  Rng rng(9);
  const auto obs = random_observations(40, 3, 2, rng);
  const Mat s = pca_embed(obs, 2);
  // captured variance beats any random 2-dimensional projection
  Mat x(40, 6);
  for (Index i = 0; i < 40; ++i) x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(obs.data().data() + i * 6, 6);
  x.rowwise() -= x.colwise().mean();
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::HouseholderQR<Mat> qr(random_matrix(6, 2, rng));
    const Mat q = qr.householderQ() * Mat::Identity(6, 2);
    CHECK((x * q).squaredNorm() <= s.squaredNorm() + 1e-9);
  }
  CHECK((pca_embed(obs, 2) - s).norm() == 0.0);
  CHECK_THROWS_AS(pca_embed(obs, 7), std::invalid_argument);
  CHECK_THROWS_AS(pca_embed(obs, 0), std::invalid_argument);
}
