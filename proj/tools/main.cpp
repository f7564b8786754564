#include "commands.hpp"

#include "lrcc/dataset.hpp"
#include "lrcc/solver.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

using namespace lrcc::cli;

namespace {

struct Flags {
  std::string config;
  std::string gamma1_grid;
  std::string gamma2_grid;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  std::string sizes;
};

void add_common(CLI::App* app, RunConfig& c, Flags& f) {
  app->add_option("--config", f.config, "JSON config; command-line flags override it");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "RNG seed");
}

void add_data(CLI::App* app, RunConfig& c) {
  app->add_option("--data", c.data, "observations (.mts, or .csv with --d1/--d2)");
  app->add_option("--labels", c.labels, "ground-truth labels");
  app->add_option("--d1", c.d1, "rows per sample (CSV input)");
  app->add_option("--d2", c.d2, "columns per sample (CSV input)");
}

void add_graph(CLI::App* app, RunConfig& c) {
  app->add_option("--graph-k", c.graph_k, "neighbours per node");
  app->add_option("--knn-mode", c.knn_mode, "union or intersection");
  app->add_option("--kernel-scale", c.kernel_scale, "gaussian weight scale phi; 0 keeps unit weights");
  app->add_option("--edges", c.edges, "edge list file; replaces the k-NN graph");
}

void add_gammas(CLI::App* app, Flags& f) {
  app->add_option("--gamma1", f.gamma1, "fusion penalty");
  app->add_option("--gamma2", f.gamma2, "nuclear-norm penalty");
}

void add_solver(CLI::App* app, RunConfig& c) {
  app->add_option("--tol", c.tol, "KKT tolerance");
  app->add_option("--max-outer", c.max_outer, "outer iteration limit");
  app->add_option("--sigma0", c.sigma0, "initial penalty");
  app->add_option("--sigma-growth", c.sigma_growth, "penalty growth factor");
  app->add_option("--sigma-cap", c.sigma_cap, "penalty cap");
  app->add_option("--merge-tol", c.merge_tol, "centroid merge tolerance");
}

/// Values set on the command line win over the config file.
RunConfig merge(CLI::App* sub, const RunConfig& cli, const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw lrcc::DataFormatError(lrcc::DataFormatError::Kind::Io, "cannot open " + f.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    from_json(j, c);
  }
  auto given = [&](const char* name) {
    try {
      return sub->get_option(name)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
#define TAKE(flag, field) \
  if (given(flag)) c.field = cli.field
  TAKE("--out", out);
  TAKE("--seed", seed);
  TAKE("--data", data);
  TAKE("--labels", labels);
  TAKE("--pred", pred);
  TAKE("--edges", edges);
  TAKE("--means", means);
  TAKE("--x-hat", x_hat);
  TAKE("--d1", d1);
  TAKE("--d2", d2);
  TAKE("--graph-k", graph_k);
  TAKE("--knn-mode", knn_mode);
  TAKE("--kernel-scale", kernel_scale);
  TAKE("--tol", tol);
  TAKE("--max-outer", max_outer);
  TAKE("--sigma0", sigma0);
  TAKE("--sigma-growth", sigma_growth);
  TAKE("--sigma-cap", sigma_cap);
  TAKE("--merge-tol", merge_tol);
  TAKE("--workers", workers);
  TAKE("--generator", generator);
  TAKE("--n-per", n_per);
  TAKE("--n", n);
  TAKE("--clusters", clusters);
  TAKE("--rank", rank);
  TAKE("--noise", noise);
  TAKE("--scale", scale);
  TAKE("--share-factors", share_factors);
  TAKE("--mode", mode);
  TAKE("--sigma", sigma);
  TAKE("--t", t);
  TAKE("--epsilon", epsilon);
  TAKE("--k", k);
  TAKE("--init", init);
  TAKE("--max-iter", max_iter);
  TAKE("--dims", dims);
#undef TAKE
  if (given("--no-trace")) c.write_trace = false;
  if (given("--gamma1")) c.gamma1 = f.gamma1;
  if (given("--gamma2")) c.gamma2 = f.gamma2;
  if (given("--gamma1-grid")) c.gamma1_grid = parse_grid(f.gamma1_grid);
  if (given("--gamma2-grid")) c.gamma2_grid = parse_grid(f.gamma2_grid);
  if (given("--sizes")) {
    c.sizes.clear();
    for (double v : parse_grid(f.sizes)) {
      if (v < 1 || v != static_cast<double>(static_cast<lrcc::Index>(v))) throw UsageError("--sizes takes positive integers");
      c.sizes.push_back(static_cast<lrcc::Index>(v));
    }
  }
  c.subcommand = sub->get_name();
  validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex clustering of matrix-valued observations with fused low-rank centroids"};
  app.require_subcommand(1);
  RunConfig c;
  Flags f;
  bool no_trace = false;

  std::map<std::string, std::function<int(const RunConfig&)>> handlers = {
      {"gen", cmd_gen},   {"graph", cmd_graph},       {"fit", cmd_fit},   {"path", cmd_path},
      {"check", cmd_check}, {"baseline", cmd_baseline}, {"eval", cmd_eval}, {"embed", cmd_embed}};

  auto* gen = app.add_subcommand("gen", "generate a synthetic labeled data set");
  add_common(gen, c, f);
  gen->add_option("--generator", c.generator, "quarter-sphere, unbalanced, recipe or mixture");
  gen->add_option("--n-per", c.n_per, "samples per cluster (quarter-sphere, recipe)");
  gen->add_option("--n", c.n, "sample count (mixture)");
  gen->add_option("--d1", c.d1, "rows per sample");
  gen->add_option("--d2", c.d2, "columns per sample");
  gen->add_option("--clusters", c.clusters, "cluster count (recipe, mixture)");
  gen->add_option("--rank", c.rank, "centroid rank (recipe, mixture)");
  gen->add_option("--noise", c.noise, "noise standard deviation");
  gen->add_option("--scale", c.scale, "singular value scale (mixture)");
  gen->add_option("--sizes", f.sizes, "cluster sizes, comma separated (unbalanced)");
  gen->add_flag("--share-factors", c.share_factors, "one singular frame for both quarter-sphere clusters");

  auto* graph = app.add_subcommand("graph", "build the k-NN similarity graph");
  add_common(graph, c, f);
  add_data(graph, c);
  add_graph(graph, c);

  auto* fit = app.add_subcommand("fit", "solve one clustering problem");
  add_common(fit, c, f);
  add_data(fit, c);
  add_graph(fit, c);
  add_gammas(fit, f);
  add_solver(fit, c);
  fit->add_flag("--no-trace", no_trace, "skip trace.jsonl");

  auto* path = app.add_subcommand("path", "sweep a (gamma1, gamma2) grid");
  add_common(path, c, f);
  add_data(path, c);
  add_graph(path, c);
  add_gammas(path, f);
  add_solver(path, c);
  path->add_option("--gamma1-grid", f.gamma1_grid, "comma separated gamma1 values");
  path->add_option("--gamma2-grid", f.gamma2_grid, "comma separated gamma2 values");
  path->add_option("--workers", c.workers, "threads, one grid row each");

  auto* check = app.add_subcommand("check", "evaluate the recovery and error-bound conditions");
  add_common(check, c, f);
  add_data(check, c);
  add_graph(check, c);
  add_gammas(check, f);
  check->add_option("--mode", c.mode, "recovery, asymptotic or prediction");
  check->add_option("--means", c.means, "true class means (.mts, one per class)");
  check->add_option("--x-hat", c.x_hat, "fitted centroids (.mts, one per sample) for the prediction bound");
  check->add_option("--sigma", c.sigma, "noise level");
  check->add_option("--t", c.t, "ball radius factor (asymptotic)");
  check->add_option("--epsilon", c.epsilon, "margin (asymptotic)");

  auto* baseline = app.add_subcommand("baseline", "low-rank Lloyd baseline");
  add_common(baseline, c, f);
  add_data(baseline, c);
  baseline->add_option("--k", c.k, "cluster count");
  baseline->add_option("--rank", c.rank, "centroid rank");
  baseline->add_option("--init", c.init, "random or spectral");
  baseline->add_option("--max-iter", c.max_iter, "iteration limit");

  auto* eval = app.add_subcommand("eval", "ARI and NMI between two label files");
  add_common(eval, c, f);
  eval->add_option("--labels", c.labels, "reference labels");
  eval->add_option("--pred", c.pred, "predicted labels");

  auto* embed = app.add_subcommand("embed", "PCA embedding of the vectorized samples");
  add_common(embed, c, f);
  add_data(embed, c);
  embed->add_option("--dims", c.dims, "embedding dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const RunConfig cfg = merge(sub, c, f);
    return handlers.at(cfg.subcommand)(cfg);
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const lrcc::ShapeError& e) {
    std::cerr << sub->get_name() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const lrcc::DataFormatError& e) {
    std::cerr << sub->get_name() << ": " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << sub->get_name() << ": " << e.what() << '\n';
    return kIoError;
  } catch (const lrcc::SolverError& e) {
    std::cerr << sub->get_name() << ": " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << sub->get_name() << ": " << e.what() << '\n';
    return kUsage;
  }
}
