#include "lrcc/baseline.hpp"

#include "lrcc/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <numeric>

namespace lrcc {

std::string to_string(LloydInit init) {
  return init == LloydInit::Spectral ? "spectral" : "random-assignment";
}

LloydInit parse_lloyd_init(const std::string& name) {
  if (name == "spectral") return LloydInit::Spectral;
  if (name == "random" || name == "random-assignment") return LloydInit::RandomAssignment;
  throw std::invalid_argument("unknown init mode '" + name + "'");
}

RowMat truncate_rank(const Eigen::Ref<const RowMat>& m, Index r) {
  Eigen::JacobiSVD<Mat> svd(Mat(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index keep = std::min<Index>(r, svd.singularValues().size());
  return svd.matrixU().leftCols(keep) * svd.singularValues().head(keep).asDiagonal() *
         svd.matrixV().leftCols(keep).transpose();
}

namespace {

void check_k(const ObservationSet& obs, int k) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (k > obs.n()) throw std::invalid_argument("K exceeds the number of samples");
}

/// Plain k-means with k-means++ seeding on the rows of `pts`.
std::vector<int> kmeans_rows(const Mat& pts, int k, Rng& rng) {
  const Index n = pts.rows();
  Mat centers(k, pts.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = pts.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (pts.row(i) - centers.row(c - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2[static_cast<std::size_t>(pick)];
        if (u < 0.0) break;
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = pts.row(pick);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < 300; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist = (pts.row(i) - centers.row(c)).squaredNorm();
        if (dist < bd) {
          bd = dist;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) changed = true;
      labels[static_cast<std::size_t>(i)] = best;
    }
    std::vector<Index> count(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++count[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      double fd = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] <= 1) continue;
        const double dist = (pts.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (dist > fd) {
          fd = dist;
          far = i;
        }
      }
      --count[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      count[static_cast<std::size_t>(c)] = 1;
      changed = true;
    }
    centers.setZero();
    for (Index i = 0; i < n; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += pts.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
    if (!changed) break;
  }
  return labels;
}

std::vector<int> random_assignment(Index n, int k, Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) {
    labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])] =
        t < k ? static_cast<int>(t) : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  }
  return labels;
}

}  // namespace

std::vector<int> spectral_init(const ObservationSet& obs, int k, Index rank, std::uint64_t seed) {
  check_k(obs, k);
  if (rank < 1 || rank > obs.d2()) throw std::invalid_argument("rank must lie in [1, d2]");
  const Index n = obs.n();
  if (n == k) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::iota(labels.begin(), labels.end(), 0);
    return labels;
  }
  const Index d = obs.dim();
  Mat x(n, d);
  for (Index i = 0; i < n; ++i) {
    const RowMat t = truncate_rank(obs.matrix(i), rank);
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(t.data(), d);
  }
  x.rowwise() -= x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Mat> eig(x.transpose() * x);
  const Index dims = std::min<Index>(k, d);
  const Mat scores = x * eig.eigenvectors().rightCols(dims);
  Rng rng(seed);
  return kmeans_rows(scores, k, rng);
}

LloydResult lr_lloyd(const ObservationSet& obs, const LloydOptions& opt) {
  check_k(obs, opt.k);
  if (opt.rank < 1 || opt.rank > obs.d2()) throw std::invalid_argument("rank must lie in [1, d2]");
  if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  const Index n = obs.n();
  const int k = opt.k;
  Rng rng(opt.seed);

  LloydResult res;
  res.labels = opt.init == LloydInit::Spectral ? spectral_init(obs, k, opt.rank, opt.seed)
                                               : random_assignment(n, k, rng);
  res.centroids.assign(static_cast<std::size_t>(k), RowMat::Zero(obs.d1(), obs.d2()));

  auto update = [&] {
    std::vector<RowMat> sum(static_cast<std::size_t>(k), RowMat::Zero(obs.d1(), obs.d2()));
    std::vector<Index> count(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])] += obs.matrix(i);
      ++count[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] == 0) continue;
      res.centroids[static_cast<std::size_t>(c)] =
          truncate_rank(sum[static_cast<std::size_t>(c)] / static_cast<double>(count[static_cast<std::size_t>(c)]), opt.rank);
    }
  };
  auto objective = [&] {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      s += (obs.matrix(i) - res.centroids[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])]).squaredNorm();
    }
    return s;
  };

  update();
  res.objective.push_back(objective());
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<int> next(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (obs.matrix(i) - res.centroids[static_cast<std::size_t>(c)]).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      next[static_cast<std::size_t>(i)] = best;
      dist[static_cast<std::size_t>(i)] = bd;
    }
    std::vector<Index> count(static_cast<std::size_t>(k), 0);
    for (int l : next) ++count[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) continue;
      // Reseed from the sample farthest from its centroid among clusters that
      // can spare one.
      Index far = -1;
      double fd = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (count[static_cast<std::size_t>(next[static_cast<std::size_t>(i)])] <= 1) continue;
        if (dist[static_cast<std::size_t>(i)] > fd) {
          fd = dist[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      --count[static_cast<std::size_t>(next[static_cast<std::size_t>(far)])];
      next[static_cast<std::size_t>(far)] = c;
      count[static_cast<std::size_t>(c)] = 1;
      res.centroids[static_cast<std::size_t>(c)] = truncate_rank(obs.matrix(far), opt.rank);
      dist[static_cast<std::size_t>(far)] = (obs.matrix(far) - res.centroids[static_cast<std::size_t>(c)]).squaredNorm();
    }
    const bool unchanged = next == res.labels;
    res.labels = std::move(next);
    res.iterations = it;
    if (unchanged) {
      res.converged = true;
      break;
    }
    update();
    res.objective.push_back(objective());
  }
  return res;
}

}  // namespace lrcc
