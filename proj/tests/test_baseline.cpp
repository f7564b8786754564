#include "doctest.h"

#include "lrcc/baseline.hpp"
#include "lrcc/eval.hpp"
#include "support.hpp"

#include <Eigen/SVD>

using namespace lrcc;
using namespace lrcc::test;

namespace {

/// Two well separated rank-1 means with small additive noise.
ObservationSet separated_mixture(Index per, double noise, Rng& rng, std::vector<int>& truth) {
  const Index d1 = 5, d2 = 3;
  RowMat m0 = 4.0 * random_vector(d1, rng) * random_vector(d2, rng).transpose();
  RowMat m1 = -m0;
  std::vector<double> data;
  truth.clear();
  for (Index i = 0; i < 2 * per; ++i) {
    const RowMat a = (i % 2 ? m1 : m0) + noise * random_matrix(d1, d2, rng);
    truth.push_back(static_cast<int>(i % 2));
    data.insert(data.end(), a.data(), a.data() + a.size());
  }
  return ObservationSet(2 * per, d1, d2, std::move(data));
}

Index numerical_rank(const RowMat& m) {
  Eigen::JacobiSVD<Mat> svd{Mat(m)};
  const auto& s = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) r += s(i) > 1e-10 * std::max(1.0, s(0));
  return r;
}

}  // namespace

TEST_CASE("truncate_rank") {
  Rng rng(1);
  const RowMat m = random_matrix(6, 4, rng);
  CHECK(numerical_rank(truncate_rank(m, 2)) == 2);
  CHECK((truncate_rank(m, 4) - m).norm() <= 1e-12);
  Eigen::JacobiSVD<Mat> svd{Mat(m)};
  const auto& s = svd.singularValues();
  CHECK((truncate_rank(m, 1) - m).norm() == doctest::Approx(s.tail(3).norm()));
}

TEST_CASE("lr_lloyd with one cluster returns the truncated mean") {
  Rng rng(2);
  const auto obs = random_observations(15, 4, 3, rng);
  LloydOptions opt;
  opt.k = 1;
  opt.rank = 2;
  const auto res = lr_lloyd(obs, opt);
  RowMat mean = RowMat::Zero(4, 3);
  for (Index i = 0; i < 15; ++i) mean += obs.matrix(i);
  mean /= 15.0;
  CHECK((res.centroids[0] - truncate_rank(mean, 2)).norm() <= 1e-12);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
}

TEST_CASE("lr_lloyd recovers a separated mixture") {
  Rng rng(3);
  std::vector<int> truth;
  const auto obs = separated_mixture(20, 0.05, rng, truth);
  for (LloydInit init : {LloydInit::RandomAssignment, LloydInit::Spectral}) {
    LloydOptions opt;
    opt.k = 2;
    opt.rank = 1;
    opt.init = init;
    opt.seed = 7;
    const auto res = lr_lloyd(obs, opt);
    CHECK(ari(res.labels, truth) == 1.0);
    CHECK(res.converged);
    for (const auto& c : res.centroids) CHECK(numerical_rank(c) <= 1);
  }
}

TEST_CASE("lr_lloyd objective is nonincreasing and centroids respect the rank") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto obs = random_observations(30, 4, 3, rng);
    LloydOptions opt;
    opt.k = 2 + static_cast<int>(rng.below(4));
    opt.rank = 1 + static_cast<Index>(rng.below(3));
    opt.seed = rng.next_u64();
    const auto res = lr_lloyd(obs, opt);
    for (std::size_t t = 1; t < res.objective.size(); ++t) {
      CHECK(res.objective[t] <= res.objective[t - 1] * (1.0 + 1e-12));
    }
    for (const auto& c : res.centroids) CHECK(numerical_rank(c) <= opt.rank);
    std::vector<int> used(static_cast<std::size_t>(opt.k), 0);
    for (int l : res.labels) used[static_cast<std::size_t>(l)] = 1;
    for (int u : used) CHECK(u == 1);
    // same seed, same answer
    CHECK(lr_lloyd(obs, opt).labels == res.labels);
  }
}

TEST_CASE("spectral_init") {
  Rng rng(5);
  const auto obs = random_observations(4, 3, 2, rng);
  CHECK(spectral_init(obs, 4, 1, 0) == std::vector<int>{0, 1, 2, 3});
  std::vector<int> truth;
  const auto mix = separated_mixture(15, 0.05, rng, truth);
  const auto l = spectral_init(mix, 2, 1, 11);
  CHECK(ari(l, truth) == 1.0);
  CHECK(spectral_init(mix, 2, 1, 11) == l);
  CHECK_THROWS_AS(spectral_init(obs, 5, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(spectral_init(obs, 2, 3, 0), std::invalid_argument);
}

TEST_CASE("lloyd argument checks") {
  Rng rng(6);
  const auto obs = random_observations(5, 3, 2, rng);
  LloydOptions opt;
  opt.k = 6;
  CHECK_THROWS_AS(lr_lloyd(obs, opt), std::invalid_argument);
  opt.k = 0;
  CHECK_THROWS_AS(lr_lloyd(obs, opt), std::invalid_argument);
  opt.k = 2;
  opt.rank = 3;
  CHECK_THROWS_AS(lr_lloyd(obs, opt), std::invalid_argument);
  opt.rank = 1;
  opt.max_iter = 0;
  CHECK_THROWS_AS(lr_lloyd(obs, opt), std::invalid_argument);

  CHECK(parse_lloyd_init("spectral") == LloydInit::Spectral);
  CHECK(parse_lloyd_init("random") == LloydInit::RandomAssignment);
  CHECK(parse_lloyd_init(to_string(LloydInit::RandomAssignment)) == LloydInit::RandomAssignment);
  CHECK_THROWS_AS(parse_lloyd_init("kmeans++"), std::invalid_argument);
}
