#include "run_config.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace lrcc::cli {

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  field = v;
}

}  // namespace

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  static const std::set<std::string> known = {
      "data", "labels", "pred", "edges", "means", "x_hat", "graph_k", "knn_mode", "kernel_scale", "gamma1",
      "gamma2", "gamma1_grid", "gamma2_grid", "tol", "max_outer", "sigma0", "sigma_growth", "sigma_cap",
      "merge_tol", "workers", "write_trace", "seed", "out", "generator", "n_per", "n", "d1", "d2", "clusters",
      "rank", "noise", "scale", "sizes", "share_factors", "mode", "sigma", "t", "epsilon", "k", "init",
      "max_iter", "dims"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw UsageError("unknown config key '" + key + "'");
  }
  read(j, "data", c.data);
  read(j, "labels", c.labels);
  read(j, "pred", c.pred);
  read(j, "edges", c.edges);
  read(j, "means", c.means);
  read(j, "x_hat", c.x_hat);
  read(j, "graph_k", c.graph_k);
  read(j, "knn_mode", c.knn_mode);
  read(j, "kernel_scale", c.kernel_scale);
  read(j, "gamma1", c.gamma1);
  read(j, "gamma2", c.gamma2);
  read(j, "gamma1_grid", c.gamma1_grid);
  read(j, "gamma2_grid", c.gamma2_grid);
  read(j, "tol", c.tol);
  read(j, "max_outer", c.max_outer);
  read(j, "sigma0", c.sigma0);
  read(j, "sigma_growth", c.sigma_growth);
  read(j, "sigma_cap", c.sigma_cap);
  read(j, "merge_tol", c.merge_tol);
  read(j, "workers", c.workers);
  read(j, "write_trace", c.write_trace);
  read(j, "seed", c.seed);
  read(j, "out", c.out);
  read(j, "generator", c.generator);
  read(j, "n_per", c.n_per);
  read(j, "n", c.n);
  read(j, "d1", c.d1);
  read(j, "d2", c.d2);
  read(j, "clusters", c.clusters);
  read(j, "rank", c.rank);
  read(j, "noise", c.noise);
  read(j, "scale", c.scale);
  read(j, "sizes", c.sizes);
  read(j, "share_factors", c.share_factors);
  read(j, "mode", c.mode);
  read(j, "sigma", c.sigma);
  read(j, "t", c.t);
  read(j, "epsilon", c.epsilon);
  read(j, "k", c.k);
  read(j, "init", c.init);
  read(j, "max_iter", c.max_iter);
  read(j, "dims", c.dims);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["subcommand"] = c.subcommand;
  j["data"] = c.data;
  j["labels"] = c.labels;
  j["pred"] = c.pred;
  j["edges"] = c.edges;
  j["means"] = c.means;
  j["x_hat"] = c.x_hat;
  j["graph_k"] = c.graph_k;
  j["knn_mode"] = c.knn_mode;
  j["kernel_scale"] = c.kernel_scale;
  j["gamma1"] = c.gamma1 ? nlohmann::json(*c.gamma1) : nlohmann::json(nullptr);
  j["gamma2"] = c.gamma2 ? nlohmann::json(*c.gamma2) : nlohmann::json(nullptr);
  j["gamma1_grid"] = c.gamma1_grid;
  j["gamma2_grid"] = c.gamma2_grid;
  j["tol"] = c.tol;
  j["max_outer"] = c.max_outer;
  j["sigma0"] = c.sigma0;
  j["sigma_growth"] = c.sigma_growth;
  j["sigma_cap"] = std::isfinite(c.sigma_cap) ? nlohmann::json(c.sigma_cap) : nlohmann::json("inf");
  j["merge_tol"] = c.merge_tol;
  j["workers"] = c.workers;
  j["write_trace"] = c.write_trace;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["generator"] = c.generator;
  j["n_per"] = c.n_per;
  j["n"] = c.n;
  j["d1"] = c.d1;
  j["d2"] = c.d2;
  j["clusters"] = c.clusters;
  j["rank"] = c.rank;
  j["noise"] = c.noise;
  j["scale"] = c.scale;
  j["sizes"] = c.sizes;
  j["share_factors"] = c.share_factors;
  j["mode"] = c.mode;
  j["sigma"] = c.sigma;
  j["t"] = c.t;
  j["epsilon"] = c.epsilon;
  j["k"] = c.k;
  j["init"] = c.init;
  j["max_iter"] = c.max_iter;
  j["dims"] = c.dims;
  return j;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad grid value '" + item + "'");
    }
    if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("bad grid value '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty grid");
  return out;
}

void validate(const RunConfig& c) {
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw UsageError(c.subcommand + ": " + what);
  };
  const std::string& s = c.subcommand;
  const bool uses_data = s == "graph" || s == "fit" || s == "path" || s == "check" || s == "baseline" || s == "embed";
  if (uses_data) need(!c.data.empty(), "--data is required");
  if (s == "gen") need(!c.generator.empty(), "--generator is required");
  if (s == "fit") need(c.gamma1 && c.gamma2, "--gamma1 and --gamma2 are required");
  if (s == "path") {
    need(!c.gamma1_grid.empty() || c.gamma1, "--gamma1-grid (or --gamma1) is required");
    need(!c.gamma2_grid.empty() || c.gamma2, "--gamma2-grid (or --gamma2) is required");
  }
  if (s == "check") {
    need(!c.labels.empty(), "--labels (truth) is required");
    need(c.mode == "recovery" || c.mode == "asymptotic" || c.mode == "prediction",
         "--mode must be recovery, asymptotic or prediction");
    if (c.mode == "recovery") need(c.gamma1 && c.gamma2, "--gamma1 and --gamma2 are required");
    if (c.mode == "asymptotic") need(!c.means.empty(), "--means is required in asymptotic mode");
    if (c.mode == "prediction") need(!c.means.empty(), "--means is required in prediction mode");
  }
  if (s == "eval") need(!c.labels.empty() && !c.pred.empty(), "--labels and --pred are required");
  if (uses_data && s != "embed" && s != "baseline") {
    need(!c.edges.empty() || c.graph_k >= 1, "--graph-k must be >= 1");
    need(c.knn_mode == "union" || c.knn_mode == "intersection", "--knn-mode must be union or intersection");
    need(c.kernel_scale >= 0.0, "--kernel-scale must be nonnegative");
  }
  for (double g : c.gamma1_grid) need(g >= 0.0, "grid values must be nonnegative");
  for (double g : c.gamma2_grid) need(g >= 0.0, "grid values must be nonnegative");
  need(c.workers >= 1, "--workers must be >= 1");
}

}  // namespace lrcc::cli
