#pragma once

#include "lrcc/common.hpp"
#include "lrcc/dataset.hpp"

#include <filesystem>
#include <vector>

namespace lrcc {

struct Edge {
  Index i = 0;
  Index j = 0;
  double weight = 1.0;
};

/// Undirected weighted graph on n nodes. Edge l joins i < j; its position in
/// `edges()` is the edge index used by the stacked edge vectors.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  /// Edges are validated and sorted lexicographically by (i, j); an edge
  /// given as (j, i) is normalized to (i, j).
  WeightedGraph(Index n, std::vector<Edge> edges);

  Index num_nodes() const { return n_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(Index l) const { return edges_[static_cast<std::size_t>(l)]; }

  double min_weight() const;
  double max_weight() const;

  /// Same topology with new weights (one per edge, in edge order).
  WeightedGraph with_weights(const std::vector<double>& weights) const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
};

enum class KnnMode { Union, Intersection };

/// Unit-weight k-nearest-neighbour graph by Frobenius distance; ties go to the
/// smaller index.
WeightedGraph knn_graph(const ObservationSet& obs, Index k, KnnMode mode = KnnMode::Union);

/// All n(n-1)/2 pairs with unit weights.
WeightedGraph complete_graph(Index n);

/// w_ij = exp(-phi * ||A_i - A_j||_F^2). Weights that underflow are clamped to
/// the smallest normal double so every edge stays strictly positive.
WeightedGraph gaussian_weights(const ObservationSet& obs, const WeightedGraph& graph, double phi);

/// Stacked edge differences: block l(i,j) = x_i - x_j.
Vec apply_D(const WeightedGraph& graph, const Vec& x, Index d);
/// Adjoint of apply_D.
Vec apply_Dt(const WeightedGraph& graph, const Vec& y, Index d);

struct ComponentLabels {
  std::vector<Index> id;
  Index count = 0;
};

ComponentLabels connected_components(Index n, const std::vector<Edge>& edges);
inline ComponentLabels connected_components(const WeightedGraph& g) {
  return connected_components(g.num_nodes(), g.edges());
}

/// Smallest nonzero singular value of the unweighted node-by-edge incidence
/// matrix. Dense eigensolve of the Laplacian up to `dense_limit` nodes,
/// deflated inverse iteration above.
double sigma_min_B(const WeightedGraph& graph, Index dense_limit = 2048);

/// Lower bound (2/n) sqrt((k+1)/3) on sigma_min_B for k-NN graphs.
double knn_sigma_lower_bound(Index n, Index k);

void save_edges(const WeightedGraph& graph, const std::filesystem::path& path);
WeightedGraph load_edges(const std::filesystem::path& path, Index n);

}  // namespace lrcc
