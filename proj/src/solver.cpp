#include "lrcc/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

namespace lrcc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw SolverError(std::string("non-finite ") + what);
}

double edge_penalty(const ProblemSpec& spec, const Vec& y) {
  const Index d = spec.dim();
  double s = 0.0;
  for (Index l = 0; l < spec.num_edges(); ++l) s += spec.graph.edge(l).weight * y.segment(l * d, d).norm();
  return spec.gamma1 * s;
}

double nuclear_penalty(const ProblemSpec& spec, const Vec& x) {
  if (spec.gamma2 == 0.0) return 0.0;
  const Index d = spec.dim();
  double s = 0.0;
  for (Index i = 0; i < spec.n; ++i) s += nuclear_norm(Mat(MatView(x.data() + i * d, spec.d1, spec.d2)));
  return spec.gamma2 * s;
}

void check_state(const ProblemSpec& spec, const PrimalDualState& s) {
  const Index dn = spec.dim() * spec.n;
  const Index de = spec.dim() * spec.num_edges();
  require_shape(s.x.size() == dn && s.z.size() == dn && s.w.size() == dn, "state: x, z, w must have length d*n");
  require_shape(s.y.size() == de && s.v.size() == de, "state: y, v must have length d*|E|");
}

}  // namespace

// ---- ProblemSpec / options -----------------------------------------------------

ProblemSpec ProblemSpec::from(const ObservationSet& obs, WeightedGraph graph, double gamma1, double gamma2) {
  ProblemSpec spec;
  spec.a = obs.stacked();
  spec.n = obs.n();
  spec.d1 = obs.d1();
  spec.d2 = obs.d2();
  spec.graph = std::move(graph);
  spec.gamma1 = gamma1;
  spec.gamma2 = gamma2;
  spec.validate();
  return spec;
}

void ProblemSpec::validate() const {
  require_shape(n >= 1 && d1 >= 1 && d2 >= 1, "problem: empty shape");
  require_shape(d1 >= d2, "problem: d1 >= d2 expected");
  require_shape(a.size() == dim() * n, "problem: a must have length d1*d2*n");
  require_shape(graph.num_nodes() == n, "problem: graph node count must equal n");
  if (!a.allFinite()) throw std::invalid_argument("problem: observations must be finite");
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0) || !std::isfinite(gamma1) || !std::isfinite(gamma2)) {
    throw std::invalid_argument("problem: gamma1, gamma2 must be finite and nonnegative");
  }
}

void SolverOptions::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("solver options: ") + what); };
  if (!(sigma0 > 0.0)) fail("sigma0 must be positive");
  if (!(sigma_growth > 1.0)) fail("sigma growth must exceed 1");
  if (!(sigma_cap >= sigma0)) fail("sigma cap must be >= sigma0");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (max_outer < 1) fail("max_outer must be >= 1");
  if (max_stall < 1) fail("max_stall must be >= 1");
  if (!(eps_scale > 0.0) || !(delta_scale > 0.0) || !(delta_prime_scale > 0.0)) fail("sequence scales must be positive");
  if (!(mu_bar > 0.0 && mu_bar < 0.5)) fail("mu_bar must lie in (0, 1/2)");
  if (!(tau_bar > 0.0 && tau_bar <= 1.0)) fail("tau_bar must lie in (0, 1]");
  if (!(gamma_bar > 0.0 && gamma_bar < 1.0)) fail("gamma_bar must lie in (0, 1)");
  if (!(delta_bar > 0.0 && delta_bar < 1.0)) fail("delta_bar must lie in (0, 1)");
  if (cg_max < 1 || max_inner < 1 || max_backtracks < 1) fail("iteration caps must be positive");
  if (!(merge_tol >= 0.0)) fail("merge tolerance must be nonnegative");
}

double KktResidual::max() const { return *std::max_element(r.begin(), r.end()); }

int SolveReport::total_inner() const {
  int s = 0;
  for (const auto& rec : trace) s += rec.inner_iterations;
  return s;
}

int SolveReport::total_cg() const {
  int s = 0;
  for (const auto& rec : trace) s += rec.cg_iterations;
  return s;
}

// ---- objectives ----------------------------------------------------------------------

double primal_objective(const ProblemSpec& spec, const Vec& x) {
  require_shape(x.size() == spec.a.size(), "primal_objective: x must have length d*n");
  const double fit = 0.5 * (x - spec.a).squaredNorm();
  return fit + edge_penalty(spec, apply_D(spec.graph, x, spec.dim())) + nuclear_penalty(spec, x);
}

DualObjective dual_objective(const ProblemSpec& spec, const Vec& v, const Vec& w) {
  const Index d = spec.dim();
  require_shape(v.size() == d * spec.num_edges(), "dual_objective: v must have length d*|E|");
  require_shape(w.size() == d * spec.n, "dual_objective: w must have length d*n");
  DualObjective out;
  for (Index l = 0; l < spec.num_edges(); ++l) {
    const double radius = spec.gamma1 * spec.graph.edge(l).weight;
    const double excess = v.segment(l * d, d).norm() - radius;
    if (excess > 1e-10 * std::max(1.0, radius)) out.feasible = false;
    out.max_violation = std::max(out.max_violation, excess);
  }
  for (Index i = 0; i < spec.n; ++i) {
    const double excess = spectral_norm(Mat(MatView(w.data() + i * d, spec.d1, spec.d2))) - spec.gamma2;
    if (excess > 1e-10 * std::max(1.0, spec.gamma2)) out.feasible = false;
    out.max_violation = std::max(out.max_violation, excess);
  }
  out.max_violation = std::max(out.max_violation, 0.0);
  if (!out.feasible) {
    out.value = -std::numeric_limits<double>::infinity();
    return out;
  }
  const Vec r = apply_Dt(spec.graph, v, d) + w - spec.a;
  out.value = -0.5 * r.squaredNorm() + 0.5 * spec.a.squaredNorm();
  return out;
}

KktResidual kkt_residual(const ProblemSpec& spec, const PrimalDualState& s) {
  check_state(spec, s);
  const Index d = spec.dim();
  const double a_scale = 1.0 + spec.a.norm();
  KktResidual k;
  k.r[0] = (s.x - spec.a + apply_Dt(spec.graph, s.v, d) + s.w).norm() / a_scale;
  k.r[1] = (s.y - prox_g(s.v + s.y, 1.0, spec.graph, spec.gamma1)).norm() / (1.0 + s.y.norm());
  k.r[2] = (s.z - prox_h(s.w + s.z, 1.0, spec.d1, spec.d2, spec.gamma2)).norm() / (1.0 + s.z.norm());
  k.r[3] = (apply_D(spec.graph, s.x, d) - s.y).norm() / (1.0 + s.y.norm());
  k.r[4] = (s.x - s.z).norm() / (1.0 + s.x.norm());
  return k;
}

// ---- subproblem ----------------------------------------------------------------------

SubproblemPoint evaluate_subproblem(const ProblemSpec& spec, const Vec& x, const Vec& v_tilde, const Vec& w_tilde,
                                    double sigma) {
  const Index d = spec.dim();
  require_shape(x.size() == d * spec.n && w_tilde.size() == d * spec.n, "subproblem: x, w~ must have length d*n");
  require_shape(v_tilde.size() == d * spec.num_edges(), "subproblem: v~ must have length d*|E|");
  if (!(sigma > 0.0)) throw std::invalid_argument("subproblem: sigma must be positive");

  SubproblemPoint p;
  p.x = x;
  p.dx = apply_D(spec.graph, x, d);
  p.ug = p.dx + v_tilde / sigma;
  p.pg = prox_g(p.ug, 1.0 / sigma, spec.graph, spec.gamma1);
  p.uh = x + w_tilde / sigma;

  const double thresh = spec.gamma2 / sigma;
  double nuclear = 0.0;
  if (spec.gamma2 == 0.0) {
    p.ph = p.uh;
  } else {
    p.ph.resize(p.uh.size());
    p.factorizations.reserve(static_cast<std::size_t>(spec.n));
    for (Index i = 0; i < spec.n; ++i) {
      SvtResult r = svt(Mat(MatView(p.uh.data() + i * d, spec.d1, spec.d2)), thresh);
      MatMutView(p.ph.data() + i * d, spec.d1, spec.d2) = r.value;
      nuclear += (r.factorization.sigma.array() - thresh).max(0.0).sum();
      p.factorizations.push_back(std::move(r.factorization));
    }
  }

  // phi is L_sigma at (x, pg, ph); written this way the multiplier terms do
  // not cancel against -||v~||^2/(2 sigma).
  const Vec rg = p.dx - p.pg;
  const Vec rh = x - p.ph;
  p.phi = 0.5 * (x - spec.a).squaredNorm() + edge_penalty(spec, p.pg) + spec.gamma2 * nuclear +
          v_tilde.dot(rg) + 0.5 * sigma * rg.squaredNorm() + w_tilde.dot(rh) + 0.5 * sigma * rh.squaredNorm();
  p.grad = x - spec.a + sigma * apply_Dt(spec.graph, p.ug - p.pg, d) + sigma * (p.uh - p.ph);
  return p;
}

double phi_value(const ProblemSpec& spec, const Vec& x, const Vec& v_tilde, const Vec& w_tilde, double sigma) {
  return evaluate_subproblem(spec, x, v_tilde, w_tilde, sigma).phi;
}

Vec phi_gradient(const ProblemSpec& spec, const Vec& x, const Vec& v_tilde, const Vec& w_tilde, double sigma) {
  return evaluate_subproblem(spec, x, v_tilde, w_tilde, sigma).grad;
}

JacobianCache JacobianCache::build(const ProblemSpec& spec, const SubproblemPoint& point, double sigma) {
  const Index d = spec.dim();
  JacobianCache c;
  c.n = spec.n;
  c.d1 = spec.d1;
  c.d2 = spec.d2;
  c.edge.reserve(static_cast<std::size_t>(spec.num_edges()));
  for (Index l = 0; l < spec.num_edges(); ++l) {
    c.edge.emplace_back(point.ug.segment(l * d, d), spec.gamma1 * spec.graph.edge(l).weight / sigma);
  }
  c.sample_identity = spec.gamma2 == 0.0;
  if (!c.sample_identity) {
    require_shape(static_cast<Index>(point.factorizations.size()) == spec.n, "Jacobian cache: missing factorizations");
    c.sample.reserve(point.factorizations.size());
    for (const auto& f : point.factorizations) c.sample.emplace_back(f);
  }
  return c;
}

Vec hessian_apply(const ProblemSpec& spec, const JacobianCache& cache, double sigma, const Vec& dir) {
  const Index d = spec.dim();
  require_shape(dir.size() == d * spec.n, "hessian_apply: direction must have length d*n");
  require_shape(cache.n == spec.n && cache.d1 == spec.d1 && cache.d2 == spec.d2 &&
                    static_cast<Index>(cache.edge.size()) == spec.num_edges() &&
                    (cache.sample_identity || static_cast<Index>(cache.sample.size()) == spec.n),
                "hessian_apply: stale Jacobian cache");
  Vec out = dir;
  Vec diff(d), wdiff(d);
  for (Index l = 0; l < spec.num_edges(); ++l) {
    const Edge& e = spec.graph.edge(l);
    const auto& jac = cache.edge[static_cast<std::size_t>(l)];
    diff = dir.segment(e.i * d, d) - dir.segment(e.j * d, d);
    jac.apply(diff, wdiff);
    diff -= wdiff;
    diff *= sigma;
    out.segment(e.i * d, d) += diff;
    out.segment(e.j * d, d) -= diff;
  }
  if (!cache.sample_identity) {
    for (Index i = 0; i < spec.n; ++i) {
      const auto& jac = cache.sample[static_cast<std::size_t>(i)];
      MatView block(dir.data() + i * d, spec.d1, spec.d2);
      if (jac.is_zero()) {
        out.segment(i * d, d) += sigma * dir.segment(i * d, d);
        continue;
      }
      const Mat q = jac.apply(Mat(block));
      MatMutView(out.data() + i * d, spec.d1, spec.d2) += sigma * (block - q);
    }
  }
  return out;
}

Vec hessian_diagonal(const ProblemSpec& spec, const JacobianCache& cache, double sigma) {
  const Index d = spec.dim();
  Vec diag = Vec::Zero(d * spec.n);
  Vec acc(d);
  for (Index l = 0; l < spec.num_edges(); ++l) {
    const Edge& e = spec.graph.edge(l);
    acc.setZero();
    cache.edge[static_cast<std::size_t>(l)].add_complement_diagonal(acc);
    diag.segment(e.i * d, d) += acc;
    diag.segment(e.j * d, d) += acc;
  }
  diag *= sigma;
  if (!cache.sample_identity) {
    for (Index i = 0; i < spec.n; ++i) {
      const double avg = cache.sample[static_cast<std::size_t>(i)].trace() / static_cast<double>(d);
      diag.segment(i * d, d).array() += sigma * std::max(0.0, 1.0 - avg);
    }
  }
  diag.array() += 1.0;
  return diag;
}

CgResult cg_solve(const LinearOperator& op, const Vec& grad, double tol, int max_iter, const Vec* inv_diag) {
  CgResult res;
  res.x = Vec::Zero(grad.size());
  Vec r = -grad;
  double rnorm = r.norm();
  res.residual = rnorm;
  if (rnorm <= tol) {
    res.converged = true;
    return res;
  }
  Vec zr = inv_diag ? Vec(inv_diag->cwiseProduct(r)) : r;
  Vec p = zr;
  double rz = r.dot(zr);
  Vec x = res.x;
  double best = rnorm;
  for (int it = 1; it <= max_iter; ++it) {
    const Vec hp = op(p);
    const double php = p.dot(hp);
    if (!std::isfinite(php)) throw CgBreakdown(it, "cg: non-finite curvature at iteration " + std::to_string(it));
    if (php <= 0.0) {
      throw CgBreakdown(it, "cg: curvature " + std::to_string(php) + " at iteration " + std::to_string(it));
    }
    const double alpha = rz / php;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * hp;
    rnorm = r.norm();
    if (!std::isfinite(rnorm)) throw CgBreakdown(it, "cg: non-finite residual at iteration " + std::to_string(it));
    res.iterations = it;
    if (rnorm < best) {
      best = rnorm;
      res.x = x;
      res.residual = rnorm;
    }
    if (rnorm <= tol) {
      res.converged = true;
      return res;
    }
    if (inv_diag) {
      zr = inv_diag->cwiseProduct(r);
    } else {
      zr = r;
    }
    const double rz_new = r.dot(zr);
    p = zr + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

SsnResult ssncg(const ProblemSpec& spec, const Vec& x0, const Vec& v_tilde, const Vec& w_tilde, double sigma,
                const SolverOptions& options, const SsnExitTest& exit_test) {
  SsnResult res;
  res.point = evaluate_subproblem(spec, x0, v_tilde, w_tilde, sigma);
  for (int j = 0;; ++j) {
    SubproblemPoint& cur = res.point;
    const double gnorm = cur.grad.norm();
    res.trace.grad_norms.push_back(gnorm);
    res.trace.phi.push_back(cur.phi);
    if (exit_test(cur)) {
      res.converged = true;
      return res;
    }
    if (j >= options.max_inner) return res;

    const JacobianCache cache = JacobianCache::build(spec, cur, sigma);
    const LinearOperator op = [&](const Vec& dir) { return hessian_apply(spec, cache, sigma, dir); };
    Vec inv_diag;
    if (options.precondition) inv_diag = hessian_diagonal(spec, cache, sigma).cwiseInverse();
    const double cg_tol = std::min(options.gamma_bar, std::pow(gnorm, 1.0 + options.tau_bar));
    CgResult cg = cg_solve(op, cur.grad, cg_tol, options.cg_max, options.precondition ? &inv_diag : nullptr);
    res.trace.cg_iterations.push_back(cg.iterations);
    if (!cg.converged) ++res.trace.cg_cap_hits;

    double slope = cur.grad.dot(cg.x);
    if (!(slope < 0.0)) {
      cg.x = -cur.grad;
      slope = -gnorm * gnorm;
    }
    // Slack of a few ulps of phi so that steps which are exact in real
    // arithmetic are not rejected because of rounding in phi itself.
    const double slack = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(cur.phi));
    double step = 1.0;
    bool accepted = false;
    for (int m = 0; m <= options.max_backtracks; ++m) {
      SubproblemPoint trial = evaluate_subproblem(spec, cur.x + step * cg.x, v_tilde, w_tilde, sigma);
      if (trial.phi <= cur.phi + options.mu_bar * step * slope + slack) {
        const bool stalled = trial.phi >= cur.phi && trial.grad.norm() >= gnorm;
        res.point = std::move(trial);
        accepted = true;
        if (stalled) {
          res.trace.step_sizes.push_back(step);
          res.trace.grad_norms.push_back(res.point.grad.norm());
          res.trace.phi.push_back(res.point.phi);
          return res;
        }
        break;
      }
      step *= options.delta_bar;
    }
    if (!accepted) {
      throw LineSearchError("ssncg: no Armijo step after " + std::to_string(options.max_backtracks) +
                            " backtracks (inner iteration " + std::to_string(j) + ")");
    }
    res.trace.step_sizes.push_back(step);
  }
}

// ---- outer loop ----------------------------------------------------------------------------

void update_multipliers(const ProblemSpec& spec, PrimalDualState& s) {
  s.v = s.v + s.sigma * (apply_D(spec.graph, s.x, spec.dim()) - s.y);
  s.w = s.w + s.sigma * (s.x - s.z);
}

AlmResult alm_solve(const ProblemSpec& spec, const SolverOptions& options, const PrimalDualState* warm_start,
                    const TraceSink& sink) {
  spec.validate();
  options.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Index d = spec.dim();

  PrimalDualState s;
  s.x = spec.a;
  s.v = Vec::Zero(d * spec.num_edges());
  s.w = Vec::Zero(d * spec.n);
  if (warm_start) {
    require_shape(warm_start->x.size() == s.x.size() && warm_start->v.size() == s.v.size() &&
                      warm_start->w.size() == s.w.size(),
                  "alm_solve: warm start does not conform");
    s.x = warm_start->x;
    s.v = warm_start->v;
    s.w = warm_start->w;
  }
  s.y = apply_D(spec.graph, s.x, d);
  s.z = s.x;
  s.sigma = options.sigma0;
  require_finite(s.x, "initial x");

  const double a_scale = 1.0 + spec.a.norm();
  AlmResult out;
  SolveReport& rep = out.report;
  PrimalDualState best;
  double best_kkt = std::numeric_limits<double>::infinity();
  int stall = 0;
  std::string stop_reason = "outer iteration cap reached";

  for (int k = 0; k < options.max_outer; ++k) {
    const double sigma = s.sigma;
    const double eps = options.eps_k(k);
    const double del = options.delta_k(k);
    const double delp = options.delta_prime_k(k);
    const double floor = 1e-13 * (a_scale + s.v.norm() + s.w.norm());
    const SsnExitTest exit_test = [&](const SubproblemPoint& p) {
      const double g = p.grad.norm();
      const double rg = (p.dx - p.pg).norm();
      const double rh = (p.x - p.ph).norm();
      const double r = std::hypot(rg, rh);
      const double thr = std::min({eps / std::sqrt(sigma), del * std::sqrt(sigma) * r, delp * r});
      if (g <= std::max(thr, floor)) return true;
      const double prospective =
          std::max({g / a_scale, rg / (1.0 + p.pg.norm()), rh / (1.0 + p.x.norm())});
      return prospective <= options.tol;
    };

    SsnResult inner;
    try {
      inner = ssncg(spec, s.x, s.v, s.w, sigma, options, exit_test);
    } catch (const CgBreakdown& e) {
      // Loss of curvature with finite values only happens once sigma has
      // outgrown double precision; keep the best iterate.
      if (k == 0 || !std::isfinite(best_kkt) || std::string(e.what()).find("non-finite") != std::string::npos) throw;
      stop_reason = std::string("inner solve broke down (") + e.what() + ")";
      break;
    }
    SubproblemPoint& p = inner.point;
    s.x = std::move(p.x);
    s.y = std::move(p.pg);
    s.z = std::move(p.ph);
    const Vec v_old = s.v;
    const Vec w_old = s.w;
    update_multipliers(spec, s);
    if (!s.x.allFinite() || !s.v.allFinite() || !s.w.allFinite()) {
      throw SolverError("alm_solve: non-finite state at outer iteration " + std::to_string(k));
    }

    OuterRecord rec;
    rec.k = k;
    rec.inner_iterations = static_cast<int>(inner.trace.step_sizes.size());
    rec.cg_per_inner = inner.trace.cg_iterations;
    for (int c : rec.cg_per_inner) rec.cg_iterations += c;
    rec.inner_grad_norms = inner.trace.grad_norms;
    rec.kkt = kkt_residual(spec, s);
    rec.primal = primal_objective(spec, s.x);
    rec.dual = dual_objective(spec, s.v, s.w);
    rec.sigma = sigma;
    rec.dual_step = std::sqrt((s.v - v_old).squaredNorm() + (s.w - w_old).squaredNorm());
    if (sink) sink(rec);
    rep.trace.push_back(rec);
    rep.outer_iterations = k + 1;

    const double kmax = rec.kkt.max();
    if (kmax < best_kkt) {
      best_kkt = kmax;
      best = s;
      stall = 0;
    } else {
      ++stall;
    }
    if (kmax <= options.tol) {
      rep.converged = true;
      best = s;
      break;
    }
    if (stall >= options.max_stall) {
      stop_reason = "no progress in " + std::to_string(stall) + " outer iterations";
      break;
    }
    s.sigma = std::min(sigma * options.sigma_growth, options.sigma_cap);
  }

  out.state = std::move(best);
  const OuterRecord* last = nullptr;
  for (const auto& rec : rep.trace) {
    if (rec.kkt.max() == best_kkt || rep.converged) last = &rec;
  }
  if (last == nullptr) last = &rep.trace.back();
  rep.primal = last->primal;
  rep.dual = last->dual;
  rep.gap = rep.dual.feasible ? std::abs(rep.primal - rep.dual.value) / (1.0 + std::abs(rep.primal)) : kNaN;
  char kkt_text[32];
  std::snprintf(kkt_text, sizeof kkt_text, "%.3g", best_kkt);
  rep.message = rep.converged ? "converged" : stop_reason + " (max KKT residual " + kkt_text + ")";
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_trace_record(std::ostream& out, const OuterRecord& rec) {
  nlohmann::json j;
  j["k"] = rec.k;
  j["inner_iters"] = rec.inner_iterations;
  j["cg_iters"] = rec.cg_iterations;
  for (int i = 0; i < 5; ++i) j["R" + std::to_string(i + 1)] = rec.kkt.r[static_cast<std::size_t>(i)];
  j["primal"] = rec.primal;
  if (rec.dual.feasible) {
    j["dual"] = rec.dual.value;
  } else {
    j["dual"] = nullptr;
  }
  j["sigma"] = rec.sigma;
  out << j.dump() << '\n';
}

nlohmann::json to_json(const SolveReport& rep) {
  nlohmann::json j;
  j["converged"] = rep.converged;
  j["message"] = rep.message;
  j["outer_iterations"] = rep.outer_iterations;
  j["inner_iterations"] = rep.total_inner();
  j["cg_iterations"] = rep.total_cg();
  j["primal"] = rep.primal;
  j["dual"] = rep.dual.feasible ? nlohmann::json(rep.dual.value) : nlohmann::json(nullptr);
  j["dual_max_violation"] = rep.dual.max_violation;
  j["gap"] = std::isfinite(rep.gap) ? nlohmann::json(rep.gap) : nlohmann::json(nullptr);
  if (!rep.trace.empty()) {
    const auto& last = rep.trace.back();
    j["final_kkt"] = last.kkt.r;
    j["final_sigma"] = last.sigma;
  }
  j["wall_seconds"] = rep.wall_seconds;
  return j;
}

// ---- clusters ------------------------------------------------------------------------------------

ClusteringResult extract_clusters(const ProblemSpec& spec, const PrimalDualState& state, double merge_tol) {
  const Index d = spec.dim();
  require_shape(state.x.size() == d * spec.n, "extract_clusters: x must have length d*n");
  if (!state.x.allFinite()) throw SolverError("extract_clusters: non-finite state");
  if (!(merge_tol >= 0.0)) throw std::invalid_argument("extract_clusters: tolerance must be nonnegative");
  const bool have_z = state.z.size() == state.x.size() && state.z.allFinite();

  std::vector<double> norms(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) norms[static_cast<std::size_t>(i)] = state.x.segment(i * d, d).norm();
  std::vector<Edge> close;
  auto consider = [&](Index i, Index j) {
    const double scale = 1.0 + std::max(norms[static_cast<std::size_t>(i)], norms[static_cast<std::size_t>(j)]);
    if ((state.x.segment(i * d, d) - state.x.segment(j * d, d)).norm() <= merge_tol * scale) {
      close.push_back({i, j, 1.0});
    }
  };
  if (spec.n <= 2000) {
    for (Index i = 0; i < spec.n; ++i)
      for (Index j = i + 1; j < spec.n; ++j) consider(i, j);
  } else {
    for (const Edge& e : spec.graph.edges()) consider(e.i, e.j);
  }
  const ComponentLabels comp = connected_components(spec.n, close);

  ClusteringResult res;
  res.labels.resize(static_cast<std::size_t>(spec.n));
  std::vector<Index> counts(static_cast<std::size_t>(comp.count), 0);
  res.centroids.assign(static_cast<std::size_t>(comp.count), RowMat::Zero(spec.d1, spec.d2));
  const Vec& src = have_z ? state.z : state.x;
  for (Index i = 0; i < spec.n; ++i) {
    const Index c = comp.id[static_cast<std::size_t>(i)];
    res.labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
    res.centroids[static_cast<std::size_t>(c)] += MatView(src.data() + i * d, spec.d1, spec.d2);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (Index c = 0; c < comp.count; ++c) {
    RowMat& m = res.centroids[static_cast<std::size_t>(c)];
    m /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    const Vec s = Eigen::JacobiSVD<Mat>(Mat(m)).singularValues();
    const double cut = std::max(1e-8 * s(0), merge_tol * (1.0 + s(0)));
    res.ranks.push_back(s(0) == 0.0 ? 0 : static_cast<Index>((s.array() > cut).count()));
  }
  res.objective = primal_objective(spec, state.x);
  return res;
}

std::vector<PathPoint> clusterpath(const ProblemSpec& base, const std::vector<double>& gamma1_grid,
                                   const std::vector<double>& gamma2_grid, const SolverOptions& options,
                                   int workers) {
  if (gamma1_grid.empty() || gamma2_grid.empty()) throw std::invalid_argument("clusterpath: grids must be nonempty");
  for (std::size_t i = 1; i < gamma1_grid.size(); ++i) {
    if (!(gamma1_grid[i] >= gamma1_grid[i - 1])) throw std::invalid_argument("clusterpath: gamma1 grid must ascend");
  }
  options.validate();
  const std::size_t n1 = gamma1_grid.size();
  std::vector<PathPoint> out(n1 * gamma2_grid.size());

  auto run_row = [&](std::size_t row) {
    std::optional<PrimalDualState> warm;
    for (std::size_t c = 0; c < n1; ++c) {
      PathPoint& pt = out[row * n1 + c];
      pt.gamma1 = gamma1_grid[c];
      pt.gamma2 = gamma2_grid[row];
      try {
        ProblemSpec spec = base;
        spec.gamma1 = pt.gamma1;
        spec.gamma2 = pt.gamma2;
        AlmResult r = alm_solve(spec, options, warm ? &*warm : nullptr);
        pt.clustering = extract_clusters(spec, r.state, options.merge_tol);
        pt.report = std::move(r.report);
        if (!pt.report.converged) pt.error = pt.report.message;
        warm = std::move(r.state);
      } catch (const std::exception& e) {
        pt.error = e.what();
        warm.reset();
      }
    }
  };

  const std::size_t rows = gamma2_grid.size();
  const std::size_t threads = std::min<std::size_t>(rows, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t r = 0; r < rows; ++r) run_row(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < rows; r = next++) run_row(r);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

// ---- Douglas-Rachford reference ---------------------------------------------------------------

OracleResult oracle_solve(const ProblemSpec& spec, double tol, int max_iter, double step) {
  spec.validate();
  if (!(tol > 0.0) || !(step > 0.0)) throw std::invalid_argument("oracle_solve: tol and step must be positive");
  const Index d = spec.dim();
  const Index n = spec.n;
  const Index m = spec.num_edges();

  // Projection onto {y = D x, z = x}: (2I + L) X = P + R + D^T Q, with nodes as rows.
  Mat lap = 2.0 * Mat::Identity(n, n);
  for (const Edge& e : spec.graph.edges()) {
    lap(e.i, e.i) += 1.0;
    lap(e.j, e.j) += 1.0;
    lap(e.i, e.j) -= 1.0;
    lap(e.j, e.i) -= 1.0;
  }
  const Eigen::LLT<Mat> chol(lap);

  Vec ux = spec.a, uy = apply_D(spec.graph, spec.a, d), uz = spec.a;
  Vec x(d * n), y(d * m), z(d * n);
  OracleResult res;
  for (int it = 1; it <= max_iter; ++it) {
    const Vec rhs = ux + uz + apply_Dt(spec.graph, uy, d);
    RowMat xs = chol.solve(Mat(MatView(rhs.data(), n, d)));
    x = Eigen::Map<const Vec>(xs.data(), d * n);
    y = apply_D(spec.graph, x, d);
    z = x;

    const Vec px = 2.0 * x - ux;
    const Vec py = 2.0 * y - uy;
    const Vec pz = 2.0 * z - uz;
    const Vec fx = (px + step * spec.a) / (1.0 + step);
    const Vec fy = prox_g(py, step, spec.graph, spec.gamma1);
    const Vec fz = prox_h(pz, step, spec.d1, spec.d2, spec.gamma2);

    const Vec dx = fx - x, dy = fy - y, dz = fz - z;
    ux += dx;
    uy += dy;
    uz += dz;
    res.iterations = it;
    const double change = std::sqrt(dx.squaredNorm() + dy.squaredNorm() + dz.squaredNorm());
    if (!std::isfinite(change)) throw SolverError("oracle_solve: non-finite iterate");
    if (change <= tol * (1.0 + x.norm())) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  if (!res.converged) throw SolverError("oracle_solve: iteration cap reached");
  return res;
}

}  // namespace lrcc
