#include "commands.hpp"

#include "lrcc/baseline.hpp"
#include "lrcc/dataset.hpp"
#include "lrcc/eval.hpp"
#include "lrcc/graph.hpp"
#include "lrcc/random.hpp"
#include "lrcc/solver.hpp"
#include "lrcc/theory.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

namespace fs = std::filesystem;

namespace lrcc::cli {

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size, std::uint64_t h) {
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a(bytes.data(), bytes.size()));
}

fs::path out_dir(const RunConfig& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataFormatError(DataFormatError::Kind::Io, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataFormatError(DataFormatError::Kind::Io, "write failed: " + path.string());
}

/// Config, input hashes and output names; enough to rerun the command.
nlohmann::json manifest(const RunConfig& c, const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["subcommand"] = c.subcommand;
  m["config"] = to_json(c);
  m["seed"] = c.seed;
  m["rng"] = Rng::kAlgorithm;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto* path : {&c.data, &c.labels, &c.pred, &c.edges, &c.means, &c.x_hat}) {
    if (!path->empty()) inputs[*path] = file_hash(*path);
  }
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  return m;
}

void finish(const RunConfig& c, const fs::path& dir, std::vector<std::string> outputs, nlohmann::json extra = {}) {
  outputs.push_back("manifest.json");
  nlohmann::json m = manifest(c, outputs);
  if (!extra.is_null()) m.update(extra);
  write_json(m, dir / "manifest.json");
}

ObservationSet load_data(const RunConfig& c) {
  const fs::path p(c.data);
  if (p.extension() == ".csv") return load_csv(p, c.d1, c.d2);
  return load_mts(p);
}

LabelVector load_truth(const RunConfig& c, Index n) {
  const auto raw = load_labels(c.labels);
  if (static_cast<Index>(raw.size()) != n) {
    throw UsageError("label file has " + std::to_string(raw.size()) + " entries for " + std::to_string(n) + " samples");
  }
  return LabelVector::compact(raw);
}

WeightedGraph build_graph(const RunConfig& c, const ObservationSet& obs) {
  if (!c.edges.empty()) return load_edges(c.edges, obs.n());
  if (c.graph_k >= obs.n()) throw UsageError("--graph-k must be smaller than the number of samples");
  WeightedGraph g = knn_graph(obs, c.graph_k, c.knn_mode == "intersection" ? KnnMode::Intersection : KnnMode::Union);
  if (c.kernel_scale > 0.0) g = gaussian_weights(obs, g, c.kernel_scale);
  return g;
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol = c.tol;
  o.max_outer = c.max_outer;
  o.sigma0 = c.sigma0;
  o.sigma_growth = c.sigma_growth;
  o.sigma_cap = c.sigma_cap;
  o.merge_tol = c.merge_tol;
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return o;
}

ObservationSet stack_matrices(const std::vector<RowMat>& ms, Index d1, Index d2) {
  std::vector<double> data;
  for (const auto& m : ms) data.insert(data.end(), m.data(), m.data() + m.size());
  return ObservationSet(static_cast<Index>(ms.size()), d1, d2, std::move(data));
}

std::vector<RowMat> unstack(const ObservationSet& obs) {
  std::vector<RowMat> out;
  for (Index i = 0; i < obs.n(); ++i) out.emplace_back(obs.matrix(i));
  return out;
}

nlohmann::json graph_summary(const WeightedGraph& g) {
  nlohmann::json j;
  j["nodes"] = g.num_nodes();
  j["edges"] = g.num_edges();
  j["components"] = connected_components(g).count;
  if (g.num_edges() > 0) {
    j["min_weight"] = g.min_weight();
    j["max_weight"] = g.max_weight();
  }
  return j;
}

void add_scores(nlohmann::json& j, const std::vector<int>& pred, const LabelVector& truth) {
  j["ari"] = ari(pred, truth.values());
  j["nmi"] = nmi(pred, truth.values());
}

}  // namespace

int cmd_gen(const RunConfig& c) {
  LabeledData data;
  std::vector<RowMat> means;
  nlohmann::json params;
  if (c.generator == "quarter-sphere") {
    QuarterSphereOptions o;
    o.n_per_cluster = c.n_per;
    o.d1 = c.d1;
    o.d2 = c.d2;
    o.noise = c.noise;
    o.share_factors = c.share_factors;
    data = gen_quarter_spheres(o, c.seed);
    params = {{"n_per", c.n_per}, {"d1", c.d1}, {"d2", c.d2}, {"noise", c.noise}, {"share_factors", c.share_factors}};
  } else if (c.generator == "unbalanced") {
    const std::vector<Index> sizes = c.sizes.empty() ? std::vector<Index>{200, 200, 200, 10, 10, 10, 10, 10} : c.sizes;
    data = gen_unbalanced_gaussian(sizes, c.d1, c.d2, c.noise, c.seed);
    params = {{"sizes", sizes}, {"d1", c.d1}, {"d2", c.d2}, {"noise", c.noise}};
  } else if (c.generator == "recipe") {
    RecoveryRecipe r;
    r.clusters = c.clusters;
    r.per_cluster = c.n_per;
    r.d1 = c.d1;
    r.d2 = c.d2;
    r.rank = c.rank;
    r.noise = c.noise;
    auto rd = gen_recovery_recipe(r, c.seed);
    data = std::move(rd.data);
    means = std::move(rd.means);
    params = {{"clusters", c.clusters}, {"n_per", c.n_per}, {"d1", c.d1}, {"d2", c.d2}, {"rank", c.rank}, {"noise", c.noise}};
  } else if (c.generator == "mixture") {
    if (c.clusters < 1 || c.rank < 1 || c.rank > std::min(c.d1, c.d2)) throw UsageError("gen: bad --clusters/--rank");
    MixtureSpec ms;
    ms.noise = c.noise;
    for (Index a = 0; a < c.clusters; ++a) {
      const auto [u, v] = random_singular_factors(c.d1, c.d2, c.rank, c.seed * 7919 + static_cast<std::uint64_t>(a) + 1);
      Vec s(c.rank);
      for (Index r = 0; r < c.rank; ++r) s(r) = c.scale * static_cast<double>(c.rank - r + a);
      ms.means.push_back(u * s.asDiagonal() * v.transpose());
      ms.weights.push_back(1.0 / static_cast<double>(c.clusters));
      ms.ranks.push_back(c.rank);
    }
    data = gen_low_rank_mixture(ms, c.n, c.seed);
    means = ms.means;
    params = {{"clusters", c.clusters}, {"n", c.n}, {"d1", c.d1}, {"d2", c.d2}, {"rank", c.rank}, {"noise", c.noise}, {"scale", c.scale}};
  } else {
    throw UsageError("gen: unknown generator '" + c.generator + "' (quarter-sphere, unbalanced, recipe, mixture)");
  }

  const fs::path dir = out_dir(c);
  save_mts(data.observations, dir / "data.mts");
  save_labels(data.labels.values(), dir / "labels.txt");
  std::vector<std::string> outputs{"data.mts", "labels.txt"};
  if (!means.empty()) {
    save_mts(stack_matrices(means, data.observations.d1(), data.observations.d2()), dir / "means.mts");
    outputs.push_back("means.mts");
  }
  const auto bytes = encode_mts(data.observations);
  std::uint64_t h = fnv1a(bytes.data(), bytes.size());
  for (int l : data.labels.values()) {
    const auto v = static_cast<std::int32_t>(l);
    h = fnv1a(reinterpret_cast<const std::uint8_t*>(&v), sizeof v, h);
  }
  nlohmann::json extra = {{"generator", c.generator}, {"params", params}, {"hash", hex64(h)},
                          {"n", data.observations.n()}};
  finish(c, dir, outputs, extra);
  nlohmann::json summary = {{"generator", c.generator}, {"params", params}, {"seed", c.seed}, {"hash", hex64(h)}};
  std::cout << summary.dump() << '\n';
  return kOk;
}

int cmd_graph(const RunConfig& c) {
  const auto obs = load_data(c);
  const auto g = build_graph(c, obs);
  const fs::path dir = out_dir(c);
  save_edges(g, dir / "edges.txt");
  nlohmann::json summary = graph_summary(g);
  if (g.num_edges() > 0) summary["sigma_min_B"] = sigma_min_B(g);
  write_json(summary, dir / "graph.json");
  finish(c, dir, {"edges.txt", "graph.json"});
  std::cout << summary.dump() << '\n';
  return kOk;
}

int cmd_fit(const RunConfig& c) {
  const auto obs = load_data(c);
  const auto g = build_graph(c, obs);
  const SolverOptions opt = solver_options(c);
  const auto spec = ProblemSpec::from(obs, g, *c.gamma1, *c.gamma2);
  const fs::path dir = out_dir(c);

  std::ofstream trace;
  std::vector<std::string> outputs;
  if (c.write_trace) {
    trace.open(dir / "trace.jsonl");
    if (!trace) throw DataFormatError(DataFormatError::Kind::Io, "cannot open trace.jsonl for writing");
    outputs.push_back("trace.jsonl");
  }
  TraceSink sink;
  if (c.write_trace) sink = [&](const OuterRecord& r) { write_trace_record(trace, r); };

  nlohmann::json report;
  report["gamma1"] = *c.gamma1;
  report["gamma2"] = *c.gamma2;
  report["graph"] = graph_summary(g);
  AlmResult res;
  try {
    res = alm_solve(spec, opt, nullptr, sink);
  } catch (const SolverError& e) {
    report["error"] = e.what();
    write_json(report, dir / "report.json");
    outputs.push_back("report.json");
    finish(c, dir, outputs);
    std::cerr << "fit: " << e.what() << '\n';
    return kSolverFailure;
  }
  report["solver"] = to_json(res.report);

  const auto cl = extract_clusters(spec, res.state, opt.merge_tol);
  save_labels(cl.labels, dir / "labels.txt");
  save_mts(stack_matrices(cl.centroids, obs.d1(), obs.d2()), dir / "centroids.mts");
  save_mts(ObservationSet::from_stacked(res.state.x, obs.d1(), obs.d2()), dir / "x.mts");
  outputs.insert(outputs.end(), {"labels.txt", "centroids.mts", "x.mts", "report.json"});
  report["clusters"] = cl.num_clusters();
  report["ranks"] = cl.ranks;
  report["objective"] = cl.objective;
  if (!c.labels.empty()) add_scores(report, cl.labels, load_truth(c, obs.n()));
  write_json(report, dir / "report.json");
  finish(c, dir, outputs);

  nlohmann::json brief = {{"converged", res.report.converged}, {"clusters", cl.num_clusters()}};
  if (report.contains("ari")) {
    brief["ari"] = report["ari"];
    brief["nmi"] = report["nmi"];
  }
  std::cout << brief.dump() << '\n';
  if (!res.report.converged) {
    std::cerr << "fit: " << res.report.message << '\n';
    return kSolverFailure;
  }
  return kOk;
}

int cmd_path(const RunConfig& c) {
  const auto obs = load_data(c);
  const auto g = build_graph(c, obs);
  const SolverOptions opt = solver_options(c);
  const auto g1 = c.gamma1_grid.empty() ? std::vector<double>{*c.gamma1} : c.gamma1_grid;
  const auto g2 = c.gamma2_grid.empty() ? std::vector<double>{*c.gamma2} : c.gamma2_grid;
  const auto base = ProblemSpec::from(obs, g, g1.front(), g2.front());

  std::optional<LabelVector> truth;
  std::optional<RecoveryReport> rec;
  if (!c.labels.empty()) {
    truth = load_truth(c, obs.n());
    if (truth->num_classes() >= 2) rec = recovery_check(obs, *truth, g, 0.0, 0.0);
  }

  const auto points = clusterpath(base, g1, g2, opt, c.workers);
  const fs::path dir = out_dir(c);
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw DataFormatError(DataFormatError::Kind::Io, "cannot open sweep.csv for writing");
  csv << "gamma1,gamma2,clusters,ari,nmi,region,converged,error\n";
  csv.precision(17);
  int failures = 0;
  for (const auto& p : points) {
    csv << p.gamma1 << ',' << p.gamma2 << ',';
    if (p.clustering) {
      csv << p.clustering->num_clusters() << ',';
      if (truth) {
        csv << ari(p.clustering->labels, truth->values()) << ',' << nmi(p.clustering->labels, truth->values());
      } else {
        csv << ',';
      }
    } else {
      csv << ",,";
    }
    csv << ',' << (rec ? to_string(region_classify(*rec, p.gamma1, p.gamma2)) : std::string()) << ','
        << (p.report.converged ? 1 : 0) << ',';
    if (!p.error.empty()) {
      ++failures;
      std::string e = p.error;
      for (char& ch : e)
        if (ch == ',' || ch == '\n') ch = ';';
      csv << e;
    }
    csv << '\n';
  }
  csv.close();
  finish(c, dir, {"sweep.csv"});
  std::cout << nlohmann::json{{"points", points.size()}, {"failures", failures}}.dump() << '\n';
  return kOk;
}

int cmd_check(const RunConfig& c) {
  const auto obs = load_data(c);
  const auto truth = load_truth(c, obs.n());
  const fs::path dir = out_dir(c);
  nlohmann::json out;
  if (c.mode == "recovery") {
    const auto g = build_graph(c, obs);
    out = to_json(recovery_check(obs, truth, g, *c.gamma1, *c.gamma2));
  } else {
    const auto means_obs = load_mts(c.means);
    if (means_obs.d1() != obs.d1() || means_obs.d2() != obs.d2() || means_obs.n() != truth.num_classes()) {
      throw UsageError("check: --means must hold one " + std::to_string(obs.d1()) + "x" + std::to_string(obs.d2()) +
                       " matrix per class");
    }
    const auto means = unstack(means_obs);
    const auto g = build_graph(c, obs);
    if (c.mode == "asymptotic") {
      out = to_json(asymptotic_check(obs, truth, means, c.sigma, g, c.t, c.epsilon, c.gamma1.value_or(0.0),
                                     c.gamma2.value_or(0.0)));
    } else {
      const Index d = obs.dim();
      Vec x0(d * obs.n());
      for (Index i = 0; i < obs.n(); ++i) {
        const RowMat& m = means[static_cast<std::size_t>(truth[i])];
        x0.segment(i * d, d) = Eigen::Map<const Vec>(m.data(), d);
      }
      const double g2 = c.gamma2.value_or(1.0);
      const double g1 = c.gamma1 ? *c.gamma1 : prediction_bound(x0, g, c.sigma, 0.0, g2, obs.d1(), obs.d2()).gamma1_threshold;
      std::optional<Vec> x_hat;
      if (!c.x_hat.empty()) {
        const auto xh = load_mts(c.x_hat);
        if (xh.n() != obs.n() || xh.d1() != obs.d1() || xh.d2() != obs.d2()) throw UsageError("check: --x-hat shape mismatch");
        x_hat = Vec(xh.stacked());
      }
      out = to_json(prediction_bound(x0, g, c.sigma, g1, g2, obs.d1(), obs.d2(), x_hat ? &*x_hat : nullptr));
    }
  }
  out["mode"] = c.mode;
  write_json(out, dir / "check.json");
  finish(c, dir, {"check.json"});
  std::cout << out.dump() << '\n';
  return kOk;
}

int cmd_baseline(const RunConfig& c) {
  const auto obs = load_data(c);
  LloydOptions o;
  o.k = c.k;
  o.rank = c.rank;
  o.max_iter = c.max_iter;
  o.seed = c.seed;
  try {
    o.init = parse_lloyd_init(c.init);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (c.k > obs.n()) throw UsageError("baseline: K exceeds the number of samples");
  const auto res = lr_lloyd(obs, o);
  const fs::path dir = out_dir(c);
  save_labels(res.labels, dir / "labels.txt");
  save_mts(stack_matrices(res.centroids, obs.d1(), obs.d2()), dir / "centroids.mts");
  nlohmann::json report = {{"k", c.k},
                           {"rank", c.rank},
                           {"init", to_string(o.init)},
                           {"iterations", res.iterations},
                           {"converged", res.converged},
                           {"objective", res.objective}};
  if (!c.labels.empty()) add_scores(report, res.labels, load_truth(c, obs.n()));
  write_json(report, dir / "report.json");
  finish(c, dir, {"labels.txt", "centroids.mts", "report.json"});
  nlohmann::json brief = {{"iterations", res.iterations}, {"converged", res.converged}};
  if (report.contains("ari")) {
    brief["ari"] = report["ari"];
    brief["nmi"] = report["nmi"];
  }
  std::cout << brief.dump() << '\n';
  return kOk;
}

int cmd_eval(const RunConfig& c) {
  const auto a = load_labels(c.labels);
  const auto b = load_labels(c.pred);
  if (a.size() != b.size()) throw UsageError("eval: label files differ in length");
  const nlohmann::json out = {{"ari", ari(a, b)}, {"nmi", nmi(a, b)}, {"n", a.size()}};
  std::cout << out.dump() << '\n';
  return kOk;
}

int cmd_embed(const RunConfig& c) {
  const auto obs = load_data(c);
  if (c.dims < 1 || c.dims > obs.dim()) throw UsageError("embed: --dims must lie in [1, d1*d2]");
  const Mat e = pca_embed(obs, c.dims);
  std::vector<int> labels;
  if (!c.labels.empty()) labels = load_truth(c, obs.n()).values();
  const fs::path dir = out_dir(c);
  std::ofstream csv(dir / "embedding.csv");
  if (!csv) throw DataFormatError(DataFormatError::Kind::Io, "cannot open embedding.csv for writing");
  csv.precision(17);
  for (Index k = 0; k < c.dims; ++k) csv << (k ? "," : "") << "pc" << k + 1;
  if (!labels.empty()) csv << ",label";
  csv << '\n';
  for (Index i = 0; i < e.rows(); ++i) {
    for (Index k = 0; k < c.dims; ++k) csv << (k ? "," : "") << e(i, k);
    if (!labels.empty()) csv << ',' << labels[static_cast<std::size_t>(i)];
    csv << '\n';
  }
  csv.close();
  finish(c, dir, {"embedding.csv"});
  return kOk;
}

}  // namespace lrcc::cli
