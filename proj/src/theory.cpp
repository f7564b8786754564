#include "lrcc/theory.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace lrcc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<Index>> members_of(const LabelVector& labels) {
  std::vector<std::vector<Index>> m(static_cast<std::size_t>(labels.num_classes()));
  for (Index i = 0; i < labels.size(); ++i) m[static_cast<std::size_t>(labels[i])].push_back(i);
  return m;
}

/// Weights of one set of nodes against everything, as dense rows.
Mat dense_rows(const WeightedGraph& graph, const std::vector<Index>& rows) {
  const Index n = graph.num_nodes();
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (std::size_t r = 0; r < rows.size(); ++r) pos[static_cast<std::size_t>(rows[r])] = static_cast<Index>(r);
  Mat w = Mat::Zero(static_cast<Index>(rows.size()), n);
  for (const Edge& e : graph.edges()) {
    if (pos[static_cast<std::size_t>(e.i)] >= 0) w(pos[static_cast<std::size_t>(e.i)], e.j) = e.weight;
    if (pos[static_cast<std::size_t>(e.j)] >= 0) w(pos[static_cast<std::size_t>(e.j)], e.i) = e.weight;
  }
  return w;
}

bool is_clique(const Mat& rows, const std::vector<Index>& members) {
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      if (rows(static_cast<Index>(a), members[b]) == 0.0) return false;
  return true;
}

// log(1 + x) - x, accurate near 0.
double log1pmx(double x) {
  if (std::abs(x) > 0.5) return std::log1p(x) - x;
  // -x^2/2 + x^3/3 - ...
  double term = x;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    term *= -x;
    const double add = term / k;
    sum += add;
    if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// lgamma(a) - [(a - 1/2) log a - a + log(2 pi)/2]
double stirling_correction(double a) {
  if (a < 10.0) {
    return std::lgamma(a) - ((a - 0.5) * std::log(a) - a + 0.5 * std::log(2.0 * M_PI));
  }
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 * (1.0 / 1188)))));
}

// x^a e^{-x} / Gamma(a), with the large exponents cancelled analytically.
double gamma_prefactor(double a, double x) {
  if (a < 10.0) return std::exp(a * std::log(x) - x - std::lgamma(a));
  const double delta = (x - a) / a;
  return std::sqrt(a / (2.0 * M_PI)) * std::exp(a * log1pmx(delta) - stirling_correction(a));
}

}  // namespace

std::vector<RowMat> cluster_means(const ObservationSet& obs, const LabelVector& labels) {
  require_shape(labels.size() == obs.n(), "cluster_means: one label per sample required");
  const int k = labels.num_classes();
  std::vector<RowMat> means(static_cast<std::size_t>(k), RowMat::Zero(obs.d1(), obs.d2()));
  std::vector<Index> count(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < obs.n(); ++i) {
    means[static_cast<std::size_t>(labels[i])] += obs.matrix(i);
    ++count[static_cast<std::size_t>(labels[i])];
  }
  for (int c = 0; c < k; ++c) {
    if (count[static_cast<std::size_t>(c)] == 0) throw std::invalid_argument("cluster_means: empty class");
    means[static_cast<std::size_t>(c)] /= static_cast<double>(count[static_cast<std::size_t>(c)]);
  }
  return means;
}

std::string to_string(Region region) {
  switch (region) {
    case Region::Perfect: return "perfect";
    case Region::MergeOnly: return "merge-only";
    case Region::DistinguishOnly: return "distinguish-only";
    case Region::Neither: return "neither";
  }
  return "unknown";
}

RecoveryReport recovery_check(const ObservationSet& obs, const LabelVector& labels, const WeightedGraph& graph,
                              double gamma1, double gamma2) {
  require_shape(labels.size() == obs.n(), "recovery_check: one label per sample required");
  require_shape(graph.num_nodes() == obs.n(), "recovery_check: graph node count must equal n");
  const Index n = obs.n();
  const Index k = labels.num_classes();
  RecoveryReport rep;
  rep.num_clusters = k;
  rep.d2 = obs.d2();
  rep.means = cluster_means(obs, labels);
  const auto members = members_of(labels);
  for (const auto& m : members) rep.sizes.push_back(static_cast<Index>(m.size()));

  if (k >= 2) {
    double delta = kInf;
    for (Index a = 0; a < k; ++a)
      for (Index b = a + 1; b < k; ++b)
        delta = std::min(delta, (rep.means[static_cast<std::size_t>(a)] - rep.means[static_cast<std::size_t>(b)]).norm());
    rep.delta = delta;
    rep.means_distinct = delta > 0.0;
  }

  // S(i, beta) = sum_{m in class beta} w_im
  Mat s = Mat::Zero(n, k);
  for (const Edge& e : graph.edges()) {
    s(e.i, labels[e.j]) += e.weight;
    s(e.j, labels[e.i]) += e.weight;
  }

  rep.condition_a = true;
  rep.gamma1_min = 0.0;
  rep.w_max = 0.0;
  for (Index alpha = 0; alpha < k; ++alpha) {
    const auto& mem = members[static_cast<std::size_t>(alpha)];
    const Mat rows = dense_rows(graph, mem);
    const bool clique = is_clique(rows, mem);
    rep.clique.push_back(clique);
    const double size = static_cast<double>(mem.size());
    double eta_max = 0.0;
    double g1min = 0.0;
    for (std::size_t a = 0; a < mem.size(); ++a) {
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        const Index i = mem[a], j = mem[b];
        const double wij = rows(static_cast<Index>(a), j);
        double eta = kInf;
        if (wij > 0.0) {
          double acc = 0.0;
          for (Index beta = 0; beta < k; ++beta) {
            if (beta != alpha) acc += std::abs(s(i, beta) - s(j, beta));
          }
          eta = acc / wij;
        }
        rep.eta.push_back({i, j, eta});
        eta_max = std::max(eta_max, eta);
        const double room = size - eta;
        const double dist = (obs.matrix(i) - obs.matrix(j)).norm();
        if (wij > 0.0 && room > 0.0) {
          g1min = std::max(g1min, dist / (wij * room));
        } else {
          g1min = kInf;
        }
      }
    }
    rep.eta_max.push_back(eta_max);
    if (!clique || !(eta_max < size)) rep.condition_a = false;
    rep.gamma1_min = std::max(rep.gamma1_min, g1min);

    double cross = 0.0;
    for (Index i : mem) cross += s.row(i).sum() - s(i, alpha);
    rep.w_max = std::max(rep.w_max, 2.0 / size * cross);
  }
  if (!rep.condition_a) rep.gamma1_min = kInf;

  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  rep.condition_b = rep.condition_a && gamma1 >= rep.gamma1_min;
  if (k >= 2) {
    rep.condition_c = rep.means_distinct && gamma1 * rep.w_max + gamma2 * std::sqrt(double(rep.d2)) < *rep.delta;
    rep.region = region_classify(rep, gamma1, gamma2);
  }
  return rep;
}

Region region_classify(const RecoveryReport& rep, double gamma1, double gamma2) {
  if (rep.num_clusters < 2 || !rep.delta) throw std::invalid_argument("region_classify: needs at least two clusters");
  const bool b = rep.condition_a && gamma1 >= rep.gamma1_min;
  const bool c = rep.means_distinct && gamma1 * rep.w_max + gamma2 * std::sqrt(double(rep.d2)) < *rep.delta;
  if (b && c) return Region::Perfect;
  if (b) return Region::MergeOnly;
  if (c) return Region::DistinguishOnly;
  return Region::Neither;
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be positive");
  if (!(x >= 0.0)) throw std::invalid_argument("regularized_gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double pre = gamma_prefactor(a, x);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 100000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return std::min(1.0, pre * sum);
  }
  // Lentz continued fraction for Q(a, x).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::max(0.0, 1.0 - pre * h);
}

double chi_cdf(double t, double d) {
  if (!(d >= 1.0)) throw std::invalid_argument("chi_cdf: d must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("chi_cdf: t must be >= 0");
  return regularized_gamma_p(0.5 * d, 0.5 * t * t);
}

AsymptoticReport asymptotic_check(const ObservationSet& obs, const LabelVector& labels,
                                  const std::vector<RowMat>& means, double sigma, const WeightedGraph& graph,
                                  double t, double epsilon, double gamma1, double gamma2) {
  const Index n = obs.n();
  const Index k = static_cast<Index>(means.size());
  require_shape(labels.size() == n, "asymptotic_check: one label per sample required");
  require_shape(labels.num_classes() == k, "asymptotic_check: one mean per class required");
  require_shape(graph.num_nodes() == n, "asymptotic_check: graph node count must equal n");
  for (const auto& m : means) require_shape(m.rows() == obs.d1() && m.cols() == obs.d2(), "asymptotic_check: mean shape");
  if (!(sigma > 0.0) || !(t > 0.0)) throw std::invalid_argument("asymptotic_check: sigma and t must be positive");

  AsymptoticReport rep;
  rep.t = t;
  rep.sigma = sigma;
  rep.epsilon = epsilon;
  rep.n = n;
  rep.d = obs.dim();
  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  rep.chi_cdf = chi_cdf(t, static_cast<double>(rep.d));
  const auto classes = members_of(labels);
  double pi_min = 1.0;
  for (const auto& c : classes) {
    rep.pi_hat.push_back(static_cast<double>(c.size()) / static_cast<double>(n));
    pi_min = std::min(pi_min, rep.pi_hat.back());
  }
  if (!(epsilon > 0.0) || !(epsilon < rep.chi_cdf * pi_min)) {
    throw std::invalid_argument("asymptotic_check: epsilon must lie in (0, F(t; d) min pi)");
  }
  rep.w_tilde_max = graph.num_edges() > 0 ? graph.max_weight() : 0.0;
  const double nn = static_cast<double>(n);
  const double merge_fail = std::exp(-2.0 * epsilon * epsilon * nn);

  for (Index alpha = 0; alpha < k; ++alpha) {
    std::vector<Index> mem;
    for (Index i = 0; i < n; ++i) {
      if ((obs.matrix(i) - means[static_cast<std::size_t>(alpha)]).norm() <= t * sigma) mem.push_back(i);
    }
    std::vector<bool> inside(static_cast<std::size_t>(n), false);
    for (Index i : mem) inside[static_cast<std::size_t>(i)] = true;
    const Mat rows = dense_rows(graph, mem);
    const double capacity = (rep.chi_cdf * rep.pi_hat[static_cast<std::size_t>(alpha)] - epsilon) * nn;
    double eta_max = 0.0;
    double bound = 0.0;
    for (std::size_t a = 0; a < mem.size(); ++a) {
      for (std::size_t b = a + 1; b < mem.size(); ++b) {
        const double wij = rows(static_cast<Index>(a), mem[b]);
        double eta = kInf;
        if (wij > 0.0) {
          double acc = 0.0;
          for (Index m = 0; m < n; ++m) {
            if (!inside[static_cast<std::size_t>(m)]) acc += std::abs(rows(static_cast<Index>(a), m) - rows(static_cast<Index>(b), m));
          }
          eta = acc / wij;
        }
        eta_max = std::max(eta_max, eta);
        const double room = capacity - eta;
        bound = (wij > 0.0 && room > 0.0) ? std::max(bound, 2.0 * t * sigma / (wij * room)) : kInf;
      }
    }
    const bool clique = is_clique(rows, mem);
    const bool a1 = clique && eta_max < capacity;
    rep.members.push_back(std::move(mem));
    rep.clique.push_back(clique);
    rep.eta_max.push_back(eta_max);
    rep.capacity.push_back(capacity);
    rep.condition_a1.push_back(a1);
    rep.gamma1_bound.push_back(a1 ? bound : kInf);
    rep.condition_b1.push_back(a1 && gamma1 >= bound);
    rep.merge_probability.push_back(1.0 - merge_fail);
  }

  for (Index alpha = 0; alpha < k; ++alpha) {
    for (Index beta = alpha + 1; beta < k; ++beta) {
      DistinguishPair p;
      p.alpha = alpha;
      p.beta = beta;
      p.lhs = gamma1 * (nn - 1.0) * rep.w_tilde_max + gamma2 * std::sqrt(static_cast<double>(obs.d2()));
      p.rhs = 0.5 * (means[static_cast<std::size_t>(alpha)] - means[static_cast<std::size_t>(beta)]).norm();
      p.holds = p.lhs < p.rhs;
      auto factor = [&](Index c) {
        const double e = (rep.chi_cdf * rep.pi_hat[static_cast<std::size_t>(c)] - epsilon) * nn;
        return 1.0 - merge_fail - std::exp2(-e);
      };
      p.probability = factor(alpha) * factor(beta);
      rep.pairs.push_back(p);
    }
  }
  rep.note =
      "distinguish probability uses the theorem-statement exponent 2^{-(F(t;d) pi - eps) n}; the proof writes "
      "2^{-F(t;d) pi n + eps n}, which is the same number";
  return rep;
}

PredictionBoundReport prediction_bound(const Vec& x0, const WeightedGraph& graph, double sigma, double gamma1,
                                       double gamma2, Index d1, Index d2, const Vec* x_hat) {
  const Index d = d1 * d2;
  const Index n = graph.num_nodes();
  require_shape(d >= 1 && n >= 1, "prediction_bound: empty shape");
  require_shape(x0.size() == d * n, "prediction_bound: x0 must have length d*n");
  if (!(sigma >= 0.0) || !(gamma1 >= 0.0) || !(gamma2 >= 0.0)) {
    throw std::invalid_argument("prediction_bound: sigma, gamma1, gamma2 must be nonnegative");
  }
  PredictionBoundReport rep;
  rep.n = n;
  rep.d = d;
  rep.num_edges = graph.num_edges();
  rep.components = connected_components(graph).count;
  rep.sigma = sigma;
  rep.gamma1 = gamma1;
  rep.gamma2 = gamma2;
  const double dd = static_cast<double>(d);
  const double nd = static_cast<double>(n);
  const double k0 = static_cast<double>(rep.components);
  const double m = static_cast<double>(rep.num_edges);

  if (rep.num_edges > 0) {
    rep.sigma_min_B = sigma_min_B(graph);
    rep.gamma1_threshold = 4.0 * sigma * std::sqrt(dd * std::log(dd * m)) / rep.sigma_min_B;
    rep.consistency = std::sqrt(m * m * std::log(dd * m) / (dd * nd * nd)) / rep.sigma_min_B;
    rep.min_weight = graph.min_weight();
  }
  rep.gamma1_above_threshold = gamma1 >= rep.gamma1_threshold;
  rep.weight_assumption = rep.num_edges == 0 || rep.min_weight >= 0.5;

  rep.variance_term = sigma * sigma * (k0 / nd + std::sqrt(k0 * std::log(dd * nd) / (dd * nd * nd)));
  double group = 0.0;
  for (const Edge& e : graph.edges()) {
    group += (1.0 + 2.0 * e.weight) * (x0.segment(e.i * d, d) - x0.segment(e.j * d, d)).norm();
  }
  rep.group_term = gamma1 / (2.0 * dd * nd) * group;
  double nuclear = 0.0;
  for (Index i = 0; i < n; ++i) {
    nuclear += Eigen::JacobiSVD<Mat>(Mat(MatView(x0.data() + i * d, d1, d2))).singularValues().sum();
  }
  rep.nuclear_term = gamma2 * (sigma / std::pow(nd, 0.25) + nuclear / (dd * nd));
  rep.rhs = rep.variance_term + rep.group_term + rep.nuclear_term;
  if (x_hat) {
    require_shape(x_hat->size() == x0.size(), "prediction_bound: x_hat must match x0");
    rep.lhs = (*x_hat - x0).squaredNorm() / (2.0 * dd * nd);
    rep.holds = *rep.lhs <= rep.rhs;
  }
  return rep;
}

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const RecoveryReport& r) {
  nlohmann::json j;
  j["num_clusters"] = r.num_clusters;
  j["sizes"] = r.sizes;
  j["delta"] = r.delta ? nlohmann::json(*r.delta) : nlohmann::json(nullptr);
  j["means_distinct"] = r.means_distinct;
  j["clique"] = r.clique;
  nlohmann::json em = nlohmann::json::array();
  for (double e : r.eta_max) em.push_back(number_or_null(e));
  j["eta_max"] = em;
  j["condition_a"] = r.condition_a;
  j["gamma1_min"] = number_or_null(r.gamma1_min);
  j["w_max"] = r.w_max;
  j["gamma1"] = r.gamma1;
  j["gamma2"] = r.gamma2;
  j["condition_b"] = r.condition_b;
  j["condition_c"] = r.condition_c ? nlohmann::json(*r.condition_c) : nlohmann::json(nullptr);
  j["region"] = r.region ? nlohmann::json(to_string(*r.region)) : nlohmann::json(nullptr);
  if (r.delta) {
    // gamma1 = gamma1_min and gamma1 * w_max + gamma2 * sqrt(d2) = delta
    j["boundary_lines"] = {
        {"merge", {{"gamma1", number_or_null(r.gamma1_min)}}},
        {"distinguish",
         {{"w_max", r.w_max}, {"sqrt_d2", std::sqrt(double(r.d2))}, {"delta", *r.delta}}},
    };
  }
  return j;
}

nlohmann::json to_json(const AsymptoticReport& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["sigma"] = r.sigma;
  j["epsilon"] = r.epsilon;
  j["n"] = r.n;
  j["d"] = r.d;
  j["chi_cdf"] = r.chi_cdf;
  j["pi_hat"] = r.pi_hat;
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& m : r.members) sizes.push_back(m.size());
  j["member_counts"] = sizes;
  j["members"] = r.members;
  j["clique"] = r.clique;
  nlohmann::json em = nlohmann::json::array(), gb = nlohmann::json::array();
  for (double e : r.eta_max) em.push_back(number_or_null(e));
  for (double g : r.gamma1_bound) gb.push_back(number_or_null(g));
  j["eta_max"] = em;
  j["capacity"] = r.capacity;
  j["condition_a1"] = r.condition_a1;
  j["gamma1_bound"] = gb;
  j["condition_b1"] = r.condition_b1;
  j["merge_probability"] = r.merge_probability;
  j["w_tilde_max"] = r.w_tilde_max;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"alpha", p.alpha}, {"beta", p.beta}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"condition_c1", p.holds},
                     {"probability", p.probability}});
  }
  j["pairs"] = pairs;
  j["gamma1"] = r.gamma1;
  j["gamma2"] = r.gamma2;
  j["note"] = r.note;
  return j;
}

nlohmann::json to_json(const PredictionBoundReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["d"] = r.d;
  j["num_edges"] = r.num_edges;
  j["components"] = r.components;
  j["sigma"] = r.sigma;
  j["gamma1"] = r.gamma1;
  j["gamma2"] = r.gamma2;
  j["sigma_min_B"] = r.sigma_min_B;
  j["gamma1_threshold"] = r.gamma1_threshold;
  j["gamma1_above_threshold"] = r.gamma1_above_threshold;
  j["variance_term"] = r.variance_term;
  j["group_term"] = r.group_term;
  j["nuclear_term"] = r.nuclear_term;
  j["rhs"] = r.rhs;
  j["lhs"] = r.lhs ? nlohmann::json(*r.lhs) : nlohmann::json(nullptr);
  j["holds"] = r.holds ? nlohmann::json(*r.holds) : nlohmann::json(nullptr);
  j["consistency"] = r.consistency;
  j["min_weight"] = r.min_weight;
  j["weight_assumption"] = r.weight_assumption;
  return j;
}

}  // namespace lrcc
