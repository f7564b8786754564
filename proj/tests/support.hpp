#pragma once

#include "lrcc/dataset.hpp"
#include "lrcc/graph.hpp"
#include "lrcc/random.hpp"
#include "lrcc/solver.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace lrcc::test {

inline Mat random_matrix(Index rows, Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian();
  return m;
}

inline Vec random_vector(Index n, Rng& rng) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

inline ObservationSet random_observations(Index n, Index d1, Index d2, Rng& rng, double scale = 1.0) {
  std::vector<double> data(static_cast<std::size_t>(n * d1 * d2));
  for (double& x : data) x = scale * rng.gaussian();
  return ObservationSet(n, d1, d2, std::move(data));
}

/// One scalar (1x1) sample per value.
inline ObservationSet scalar_observations(const std::vector<double>& values) {
  return ObservationSet(static_cast<Index>(values.size()), 1, 1, values);
}

/// Random connected graph: a random spanning tree plus extra random edges.
inline WeightedGraph random_connected_graph(Index n, Index extra, Rng& rng, bool random_weights = true) {
  std::vector<Edge> edges;
  auto has = [&](Index i, Index j) {
    for (const Edge& e : edges)
      if ((e.i == i && e.j == j) || (e.i == j && e.j == i)) return true;
    return false;
  };
  auto weight = [&] { return random_weights ? rng.uniform(0.2, 1.5) : 1.0; };
  for (Index i = 1; i < n; ++i) {
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i)));
    edges.push_back({j, i, weight()});
  }
  for (Index t = 0; t < extra && n > 2; ++t) {
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    if (i == j || has(i, j)) continue;
    edges.push_back({std::min(i, j), std::max(i, j), weight()});
  }
  return WeightedGraph(n, std::move(edges));
}

/// Dense Laplacian B B^T of the unweighted graph.
inline Mat dense_laplacian(const WeightedGraph& g) {
  Mat l = Mat::Zero(g.num_nodes(), g.num_nodes());
  for (const Edge& e : g.edges()) {
    l(e.i, e.i) += 1.0;
    l(e.j, e.j) += 1.0;
    l(e.i, e.j) -= 1.0;
    l(e.j, e.i) -= 1.0;
  }
  return l;
}

/// Small random problem on a random connected graph.
inline ProblemSpec random_problem(Rng& rng, Index max_n = 12, Index max_d2 = 3, double g1_hi = 1.0, double g2_hi = 1.0) {
  const Index n = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_n - 1)));
  const Index d2 = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_d2)));
  const Index d1 = d2 + static_cast<Index>(rng.below(3));
  const auto obs = random_observations(n, d1, d2, rng);
  return ProblemSpec::from(obs, random_connected_graph(n, n, rng), rng.uniform(0.0, g1_hi), rng.uniform(0.0, g2_hi));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1e-300, std::max(a.norm(), b.norm())); }

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    Rng rng(static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)) ^ 0x9e3779b97f4a7c15ULL);
    path_ = std::filesystem::temp_directory_path() / ("lrcc-test-" + std::to_string(rng.next_u64()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace lrcc::test
