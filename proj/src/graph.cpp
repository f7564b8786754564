#include "lrcc/graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace lrcc {

WeightedGraph::WeightedGraph(Index n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw std::invalid_argument("node count must be >= 0");
  for (Edge& e : edges_) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.j >= n) throw std::out_of_range("edge endpoint out of range");
    if (e.i == e.j) throw std::invalid_argument("self loops are not allowed");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw std::invalid_argument("edge weights must be positive and finite");
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  for (std::size_t l = 1; l < edges_.size(); ++l) {
    if (edges_[l].i == edges_[l - 1].i && edges_[l].j == edges_[l - 1].j) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(edges_[l].i) + ", " +
                                  std::to_string(edges_[l].j) + ")");
    }
  }
}

double WeightedGraph::min_weight() const {
  double w = std::numeric_limits<double>::infinity();
  for (const Edge& e : edges_) w = std::min(w, e.weight);
  return w;
}

double WeightedGraph::max_weight() const {
  double w = 0.0;
  for (const Edge& e : edges_) w = std::max(w, e.weight);
  return w;
}

WeightedGraph WeightedGraph::with_weights(const std::vector<double>& weights) const {
  require_shape(weights.size() == edges_.size(), "one weight per edge required");
  std::vector<Edge> e = edges_;
  for (std::size_t l = 0; l < e.size(); ++l) e[l].weight = weights[l];
  return WeightedGraph(n_, std::move(e));
}

namespace {

double squared_distance(const ObservationSet& obs, Index i, Index j) {
  const double* a = obs.data().data() + i * obs.dim();
  const double* b = obs.data().data() + j * obs.dim();
  double s = 0.0;
  for (Index t = 0; t < obs.dim(); ++t) {
    const double diff = a[t] - b[t];
    s += diff * diff;
  }
  return s;
}

}  // namespace

WeightedGraph knn_graph(const ObservationSet& obs, Index k, KnnMode mode) {
  const Index n = obs.n();
  if (k < 1 || k > n - 1) throw std::invalid_argument("k must lie in [1, n-1]");
  // neighbor[j] holds the k nearest nodes of j.
  std::vector<std::vector<Index>> neighbor(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> row(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j) {
    std::size_t t = 0;
    for (Index i = 0; i < n; ++i) {
      if (i != j) row[t++] = {squared_distance(obs, i, j), i};
    }
    std::partial_sort(row.begin(), row.begin() + k, row.end());
    auto& nb = neighbor[static_cast<std::size_t>(j)];
    for (Index q = 0; q < k; ++q) nb.push_back(row[static_cast<std::size_t>(q)].second);
    std::sort(nb.begin(), nb.end());
  }
  auto is_neighbor = [&](Index of, Index who) {
    const auto& nb = neighbor[static_cast<std::size_t>(of)];
    return std::binary_search(nb.begin(), nb.end(), who);
  };
  std::vector<Edge> edges;
  for (Index j = 0; j < n; ++j) {
    for (Index i : neighbor[static_cast<std::size_t>(j)]) {
      const bool other = is_neighbor(i, j);
      if (mode == KnnMode::Intersection && !other) continue;
      // A mutual pair is seen from both ends; keep it once.
      if (other && i > j) continue;
      edges.push_back({std::min(i, j), std::max(i, j), 1.0});
    }
  }
  return WeightedGraph(n, std::move(edges));
}

WeightedGraph complete_graph(Index n) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return WeightedGraph(n, std::move(edges));
}

WeightedGraph gaussian_weights(const ObservationSet& obs, const WeightedGraph& graph, double phi) {
  if (!(phi > 0.0)) throw std::invalid_argument("kernel scale must be > 0");
  require_shape(graph.num_nodes() == obs.n(), "graph node count differs from sample count");
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(graph.num_edges()));
  for (const Edge& e : graph.edges()) {
    w.push_back(std::max(std::exp(-phi * squared_distance(obs, e.i, e.j)), std::numeric_limits<double>::min()));
  }
  return graph.with_weights(w);
}

Vec apply_D(const WeightedGraph& graph, const Vec& x, Index d) {
  require_shape(x.size() == d * graph.num_nodes(), "apply_D: x length must be d*n");
  Vec out(d * graph.num_edges());
  for (Index l = 0; l < graph.num_edges(); ++l) {
    const Edge& e = graph.edge(l);
    out.segment(l * d, d) = x.segment(e.i * d, d) - x.segment(e.j * d, d);
  }
  return out;
}

Vec apply_Dt(const WeightedGraph& graph, const Vec& y, Index d) {
  require_shape(y.size() == d * graph.num_edges(), "apply_Dt: y length must be d*|E|");
  Vec out = Vec::Zero(d * graph.num_nodes());
  for (Index l = 0; l < graph.num_edges(); ++l) {
    const Edge& e = graph.edge(l);
    out.segment(e.i * d, d) += y.segment(l * d, d);
    out.segment(e.j * d, d) -= y.segment(l * d, d);
  }
  return out;
}

ComponentLabels connected_components(Index n, const std::vector<Edge>& edges) {
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      auto& p = parent[static_cast<std::size_t>(v)];
      p = parent[static_cast<std::size_t>(p)];
      v = p;
    }
    return v;
  };
  for (const Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) throw std::out_of_range("edge endpoint out of range");
    const Index a = find(e.i);
    const Index b = find(e.j);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  ComponentLabels out;
  out.id.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> root_id(static_cast<std::size_t>(n), -1);
  for (Index v = 0; v < n; ++v) {
    const Index r = find(v);
    auto& id = root_id[static_cast<std::size_t>(r)];
    if (id < 0) id = out.count++;
    out.id[static_cast<std::size_t>(v)] = id;
  }
  return out;
}

namespace {

// Laplacian-vector product for the unweighted graph.
Vec laplacian_apply(const WeightedGraph& g, const std::vector<Index>& degree, const Vec& x) {
  Vec out(x.size());
  for (Index v = 0; v < x.size(); ++v) out(v) = static_cast<double>(degree[static_cast<std::size_t>(v)]) * x(v);
  for (const Edge& e : g.edges()) {
    out(e.i) -= x(e.j);
    out(e.j) -= x(e.i);
  }
  return out;
}

// Removes the per-component means, i.e. projects onto the complement of the
// Laplacian null space.
void deflate(const ComponentLabels& comp, const std::vector<double>& comp_size, Vec& x) {
  std::vector<double> mean(static_cast<std::size_t>(comp.count), 0.0);
  for (Index v = 0; v < x.size(); ++v) mean[static_cast<std::size_t>(comp.id[static_cast<std::size_t>(v)])] += x(v);
  for (Index c = 0; c < comp.count; ++c) mean[static_cast<std::size_t>(c)] /= comp_size[static_cast<std::size_t>(c)];
  for (Index v = 0; v < x.size(); ++v) x(v) -= mean[static_cast<std::size_t>(comp.id[static_cast<std::size_t>(v)])];
}

double sigma_min_inverse_iteration(const WeightedGraph& g) {
  const Index n = g.num_nodes();
  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  for (const Edge& e : g.edges()) {
    ++degree[static_cast<std::size_t>(e.i)];
    ++degree[static_cast<std::size_t>(e.j)];
  }
  const ComponentLabels comp = connected_components(g);
  std::vector<double> comp_size(static_cast<std::size_t>(comp.count), 0.0);
  for (Index v = 0; v < n; ++v) comp_size[static_cast<std::size_t>(comp.id[static_cast<std::size_t>(v)])] += 1.0;

  Vec x(n);
  for (Index v = 0; v < n; ++v) x(v) = std::sin(1.0 + 0.7 * static_cast<double>(v)) + 0.01 * static_cast<double>(v % 7);
  deflate(comp, comp_size, x);
  x.normalize();

  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    // Solve L y = x on the deflated subspace with CG.
    Vec y = Vec::Zero(n);
    Vec r = x;
    Vec p = r;
    double rr = r.squaredNorm();
    for (int cg = 0; cg < 10 * n && std::sqrt(rr) > 1e-13; ++cg) {
      Vec lp = laplacian_apply(g, degree, p);
      const double step = rr / p.dot(lp);
      y += step * p;
      r -= step * lp;
      deflate(comp, comp_size, r);
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    deflate(comp, comp_size, y);
    y.normalize();
    const double next = y.dot(laplacian_apply(g, degree, y));
    const bool done = it > 0 && std::abs(next - lambda) <= 1e-13 * std::max(1.0, next);
    lambda = next;
    x = y;
    if (done) break;
  }
  return std::sqrt(lambda);
}

}  // namespace

double sigma_min_B(const WeightedGraph& graph, Index dense_limit) {
  if (graph.num_edges() == 0) throw std::invalid_argument("sigma_min_B needs at least one edge");
  const Index n = graph.num_nodes();
  if (n > dense_limit) return sigma_min_inverse_iteration(graph);
  Mat lap = Mat::Zero(n, n);
  for (const Edge& e : graph.edges()) {
    lap(e.i, e.i) += 1.0;
    lap(e.j, e.j) += 1.0;
    lap(e.i, e.j) -= 1.0;
    lap(e.j, e.i) -= 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(lap, Eigen::EigenvaluesOnly);
  const Vec& ev = eig.eigenvalues();
  const double cut = 1e-9 * ev(n - 1);
  for (Index t = 0; t < n; ++t) {
    if (ev(t) > cut) return std::sqrt(ev(t));
  }
  throw std::logic_error("Laplacian has no nonzero eigenvalue");
}

double knn_sigma_lower_bound(Index n, Index k) {
  if (k < 2) throw std::invalid_argument("the k-NN bound needs k >= 2");
  if (n < 2) throw std::invalid_argument("the k-NN bound needs n >= 2");
  return 2.0 / static_cast<double>(n) * std::sqrt((static_cast<double>(k) + 1.0) / 3.0);
}

void save_edges(const WeightedGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string() + " for writing");
  out.precision(17);
  for (const Edge& e : graph.edges()) out << e.i << ' ' << e.j << ' ' << e.weight << '\n';
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "write failed: " + path.string());
}

WeightedGraph load_edges(const std::filesystem::path& path, Index n) {
  std::ifstream in(path);
  if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Edge e;
    std::string extra;
    if (!(ss >> e.i >> e.j >> e.weight) || (ss >> extra)) {
      throw DataFormatError(DataFormatError::Kind::Parse,
                            path.string() + " line " + std::to_string(line_no) + ": expected 'i j w'");
    }
    edges.push_back(e);
  }
  return WeightedGraph(n, std::move(edges));
}

}  // namespace lrcc
