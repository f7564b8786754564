#pragma once

#include "lrcc/common.hpp"
#include "lrcc/dataset.hpp"
#include "lrcc/graph.hpp"
#include "lrcc/prox.hpp"

#include "json.hpp"

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lrcc {

/// min_x 1/2||x - a||^2 + gamma1 sum_l w_l ||D_l x|| + gamma2 sum_i ||M_i x||_*
struct ProblemSpec {
  Vec a;
  Index n = 0;
  Index d1 = 0;
  Index d2 = 0;
  WeightedGraph graph;
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  Index dim() const { return d1 * d2; }
  Index num_edges() const { return graph.num_edges(); }

  static ProblemSpec from(const ObservationSet& obs, WeightedGraph graph, double gamma1, double gamma2);
  void validate() const;
};

struct SolverOptions {
  double sigma0 = 1.0;
  double sigma_growth = 3.0;
  double sigma_cap = 1e8;
  double tol = 1e-6;
  int max_outer = 100;
  /// Stop after this many consecutive outer iterations without a new best
  /// KKT residual; with an unbounded sigma this is the precision-limit exit.
  int max_stall = 5;
  // Inner exit sequences: eps_k = eps_scale/(k+1)^2, delta_k =
  // delta_scale/(k+1)^2, delta'_k = delta_prime_scale/(k+1).
  double eps_scale = 1.0;
  double delta_scale = 1.0;
  double delta_prime_scale = 1.0;
  double mu_bar = 1e-4;
  double tau_bar = 0.5;
  double gamma_bar = 0.1;
  double delta_bar = 0.5;
  int cg_max = 500;
  int max_inner = 200;
  int max_backtracks = 50;
  bool precondition = true;
  double merge_tol = 1e-6;

  double eps_k(int k) const { return eps_scale / ((k + 1.0) * (k + 1.0)); }
  double delta_k(int k) const { return delta_scale / ((k + 1.0) * (k + 1.0)); }
  double delta_prime_k(int k) const { return delta_prime_scale / (k + 1.0); }
  void validate() const;
};

struct PrimalDualState {
  Vec x, y, z, v, w;
  double sigma = 1.0;
};

struct KktResidual {
  std::array<double, 5> r{};
  double max() const;
};

struct DualObjective {
  bool feasible = true;
  double value = 0.0;
  /// Largest amount by which a block exceeds its dual-norm ball (0 if feasible).
  double max_violation = 0.0;
};

struct OuterRecord {
  int k = 0;
  int inner_iterations = 0;
  int cg_iterations = 0;
  std::vector<int> cg_per_inner;
  std::vector<double> inner_grad_norms;
  KktResidual kkt;
  double primal = 0.0;
  DualObjective dual;
  double sigma = 0.0;
  /// ||(v+, w+) - (v, w)||
  double dual_step = 0.0;
};

struct SolveReport {
  std::vector<OuterRecord> trace;
  int outer_iterations = 0;
  bool converged = false;
  double primal = 0.0;
  DualObjective dual;
  double gap = 0.0;
  double wall_seconds = 0.0;
  std::string message;

  int total_inner() const;
  int total_cg() const;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- objectives and residuals -------------------------------------------------

double primal_objective(const ProblemSpec& spec, const Vec& x);
DualObjective dual_objective(const ProblemSpec& spec, const Vec& v, const Vec& w);
KktResidual kkt_residual(const ProblemSpec& spec, const PrimalDualState& state);

// ---- ALM subproblem --------------------------------------------------------------

/// Everything about phi(x) = inf_{y,z} L_sigma(x, y, z; v~, w~) at one x.
struct SubproblemPoint {
  Vec x;
  Vec dx;  ///< D x
  Vec ug;  ///< D x + v~/sigma
  Vec pg;  ///< Prox_{g/sigma}(ug), the minimizing y
  Vec uh;  ///< x + w~/sigma
  Vec ph;  ///< Prox_{h/sigma}(uh), the minimizing z
  std::vector<SvtFactorization> factorizations;
  double phi = 0.0;
  Vec grad;
};

SubproblemPoint evaluate_subproblem(const ProblemSpec& spec, const Vec& x, const Vec& v_tilde,
                                    const Vec& w_tilde, double sigma);
double phi_value(const ProblemSpec& spec, const Vec& x, const Vec& v_tilde, const Vec& w_tilde, double sigma);
Vec phi_gradient(const ProblemSpec& spec, const Vec& x, const Vec& v_tilde, const Vec& w_tilde, double sigma);

/// Per-edge and per-sample Jacobian elements shared by every Hessian product
/// of one Newton iteration.
struct JacobianCache {
  Index n = 0;
  Index d1 = 0;
  Index d2 = 0;
  std::vector<BlockThresholdJacobian> edge;
  std::vector<NuclearJacobian> sample;
  bool sample_identity = false;

  static JacobianCache build(const ProblemSpec& spec, const SubproblemPoint& point, double sigma);
};

/// (I + sigma D^*(I - W) D + sigma (I - Q)) dir
Vec hessian_apply(const ProblemSpec& spec, const JacobianCache& cache, double sigma, const Vec& dir);
/// Diagonal approximation of the Hessian used as a CG preconditioner.
Vec hessian_diagonal(const ProblemSpec& spec, const JacobianCache& cache, double sigma);

struct CgResult {
  Vec x;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

class CgBreakdown : public SolverError {
 public:
  CgBreakdown(int iteration, const std::string& what) : SolverError(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

using LinearOperator = std::function<Vec(const Vec&)>;

/// Approximately solves op(d) = -grad, stopping once ||grad + op(d)|| <= tol.
/// On hitting the cap the iterate with the smallest residual is returned with
/// converged = false. `inv_diag`, when given, is a diagonal preconditioner.
CgResult cg_solve(const LinearOperator& op, const Vec& grad, double tol, int max_iter,
                  const Vec* inv_diag = nullptr);

struct SsnTrace {
  std::vector<double> grad_norms;
  std::vector<double> phi;
  std::vector<int> cg_iterations;
  std::vector<double> step_sizes;
  int cg_cap_hits = 0;
};

struct SsnResult {
  SubproblemPoint point;
  SsnTrace trace;
  bool converged = false;
};

class LineSearchError : public SolverError {
 public:
  using SolverError::SolverError;
};

using SsnExitTest = std::function<bool(const SubproblemPoint&)>;

/// Semismooth Newton-CG on grad phi(x) = 0 with Armijo backtracking.
SsnResult ssncg(const ProblemSpec& spec, const Vec& x0, const Vec& v_tilde, const Vec& w_tilde, double sigma,
                const SolverOptions& options, const SsnExitTest& exit_test);

// ---- outer loop ----------------------------------------------------------------------

/// v+ = v + sigma (D x - y), w+ = w + sigma (x - z).
void update_multipliers(const ProblemSpec& spec, PrimalDualState& state);

struct AlmResult {
  PrimalDualState state;
  SolveReport report;
};

/// Observer called after every outer iteration.
using TraceSink = std::function<void(const OuterRecord&)>;

/// Without a warm start: x0 = a, v0 = 0, w0 = 0.
AlmResult alm_solve(const ProblemSpec& spec, const SolverOptions& options,
                    const PrimalDualState* warm_start = nullptr, const TraceSink& sink = {});

/// One JSON object per line: {k, inner_iters, cg_iters, R1..R5, primal, dual, sigma}.
void write_trace_record(std::ostream& out, const OuterRecord& record);

/// Summary without the per-iteration trace.
nlohmann::json to_json(const SolveReport& report);

// ---- cluster extraction ------------------------------------------------------------------

struct ClusteringResult {
  std::vector<int> labels;
  std::vector<RowMat> centroids;
  std::vector<Index> ranks;
  double objective = 0.0;

  Index num_clusters() const { return static_cast<Index>(centroids.size()); }
};

ClusteringResult extract_clusters(const ProblemSpec& spec, const PrimalDualState& state, double merge_tol);

struct PathPoint {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::optional<ClusteringResult> clustering;
  SolveReport report;
  std::string error;
};

/// Solves every (gamma1, gamma2) pair. Along each gamma2 row gamma1 ascends and
/// every solve is warm-started from the previous one; rows run on up to
/// `workers` threads and come back in row-major grid order.
std::vector<PathPoint> clusterpath(const ProblemSpec& base, const std::vector<double>& gamma1_grid,
                                   const std::vector<double>& gamma2_grid, const SolverOptions& options,
                                   int workers = 1);

// ---- reference solver ----------------------------------------------------------------------

struct OracleResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
};

/// Douglas-Rachford splitting on the lifted problem over (x, y, z) with the
/// consensus constraint y = D x, z = x. Slow, simple, independent of the ALM.
OracleResult oracle_solve(const ProblemSpec& spec, double tol, int max_iter = 2000000, double step = 1.0);

}  // namespace lrcc
