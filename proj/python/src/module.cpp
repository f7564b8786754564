#include "lrcc/baseline.hpp"
#include "lrcc/dataset.hpp"
#include "lrcc/eval.hpp"
#include "lrcc/graph.hpp"
#include "lrcc/solver.hpp"
#include "lrcc/theory.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lrcc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ObservationSet to_obs(const Array& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected an array of shape (n, d1, d2)");
  const auto n = static_cast<Index>(a.shape(0));
  const auto d1 = static_cast<Index>(a.shape(1));
  const auto d2 = static_cast<Index>(a.shape(2));
  return ObservationSet(n, d1, d2, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const double* data, Index n, Index d1, Index d2) {
  py::array_t<double> out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(d1), static_cast<py::ssize_t>(d2)});
  std::copy(data, data + n * d1 * d2, out.mutable_data());
  return out;
}

py::array_t<double> to_array(const std::vector<RowMat>& ms, Index d1, Index d2) {
  py::array_t<double> out({static_cast<py::ssize_t>(ms.size()), static_cast<py::ssize_t>(d1), static_cast<py::ssize_t>(d2)});
  double* p = out.mutable_data();
  for (const auto& m : ms) p = std::copy(m.data(), m.data() + m.size(), p);
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

WeightedGraph to_graph(Index n, const std::vector<std::tuple<Index, Index, double>>& edges) {
  std::vector<Edge> es;
  for (const auto& [i, j, w] : edges) es.push_back(Edge{i, j, w});
  return WeightedGraph(n, std::move(es));
}

std::vector<std::tuple<Index, Index, double>> from_graph(const WeightedGraph& g) {
  std::vector<std::tuple<Index, Index, double>> out;
  for (const auto& e : g.edges()) out.emplace_back(e.i, e.j, e.weight);
  return out;
}

py::tuple labeled(const LabeledData& d) {
  const auto& o = d.observations;
  return py::make_tuple(to_array(o.stacked().data(), o.n(), o.d1(), o.d2()), d.labels.values());
}

}  // namespace

PYBIND11_MODULE(_lrcc, m) {
  m.doc() = "Convex clustering of matrix-valued observations";

  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<DataFormatError>(m, "DataFormatError");

  m.def(
      "gen_quarter_spheres",
      [](Index n_per, Index d1, Index d2, double noise, bool share_factors, std::uint64_t seed) {
        QuarterSphereOptions o;
        o.n_per_cluster = n_per;
        o.d1 = d1;
        o.d2 = d2;
        o.noise = noise;
        o.share_factors = share_factors;
        return labeled(gen_quarter_spheres(o, seed));
      },
      py::arg("n_per") = 100, py::arg("d1") = 20, py::arg("d2") = 10, py::arg("noise") = 0.1,
      py::arg("share_factors") = false, py::arg("seed") = 0);

  m.def(
      "gen_unbalanced",
      [](const std::vector<Index>& sizes, Index d1, Index d2, double noise, std::uint64_t seed) {
        return labeled(gen_unbalanced_gaussian(sizes, d1, d2, noise, seed));
      },
      py::arg("sizes"), py::arg("d1") = 20, py::arg("d2") = 10, py::arg("noise") = 0.1, py::arg("seed") = 0);

  m.def(
      "gen_recipe",
      [](Index clusters, Index per_cluster, Index d1, Index d2, Index rank, double noise, std::uint64_t seed) {
        RecoveryRecipe r;
        r.clusters = clusters;
        r.per_cluster = per_cluster;
        r.d1 = d1;
        r.d2 = d2;
        r.rank = rank;
        r.noise = noise;
        const auto rd = gen_recovery_recipe(r, seed);
        auto t = labeled(rd.data);
        return py::make_tuple(t[0], t[1], to_array(rd.means, d1, d2));
      },
      py::arg("clusters") = 4, py::arg("per_cluster") = 50, py::arg("d1") = 20, py::arg("d2") = 10,
      py::arg("rank") = 2, py::arg("noise") = 0.1, py::arg("seed") = 0);

  m.def(
      "knn_graph",
      [](const Array& data, Index k, const std::string& mode, double kernel_scale) {
        const auto obs = to_obs(data);
        WeightedGraph g = knn_graph(obs, k, mode == "intersection" ? KnnMode::Intersection : KnnMode::Union);
        if (kernel_scale > 0.0) g = gaussian_weights(obs, g, kernel_scale);
        return from_graph(g);
      },
      py::arg("data"), py::arg("k") = 10, py::arg("mode") = "union", py::arg("kernel_scale") = 0.0,
      "Edges (i, j, weight) with i < j.");

  m.def(
      "fit",
      [](const Array& data, const std::vector<std::tuple<Index, Index, double>>& edges, double gamma1,
         double gamma2, double tol, int max_outer, double sigma_cap, double merge_tol) {
        const auto obs = to_obs(data);
        SolverOptions o;
        o.tol = tol;
        o.max_outer = max_outer;
        o.sigma_cap = sigma_cap;
        o.merge_tol = merge_tol;
        o.validate();
        const auto spec = ProblemSpec::from(obs, to_graph(obs.n(), edges), gamma1, gamma2);
        AlmResult res;
        {
          py::gil_scoped_release release;
          res = alm_solve(spec, o);
        }
        const auto cl = extract_clusters(spec, res.state, merge_tol);
        py::dict out;
        out["labels"] = cl.labels;
        out["centroids"] = to_array(cl.centroids, obs.d1(), obs.d2());
        out["ranks"] = cl.ranks;
        out["x"] = to_array(res.state.x.data(), obs.n(), obs.d1(), obs.d2());
        out["report"] = json_to_py(to_json(res.report));
        return out;
      },
      py::arg("data"), py::arg("edges"), py::arg("gamma1"), py::arg("gamma2"), py::arg("tol") = 1e-6,
      py::arg("max_outer") = 100, py::arg("sigma_cap") = 1e8, py::arg("merge_tol") = 1e-6);

  m.def(
      "lr_lloyd",
      [](const Array& data, int k, Index rank, const std::string& init, int max_iter, std::uint64_t seed) {
        const auto obs = to_obs(data);
        LloydOptions o;
        o.k = k;
        o.rank = rank;
        o.init = parse_lloyd_init(init);
        o.max_iter = max_iter;
        o.seed = seed;
        const auto res = lr_lloyd(obs, o);
        py::dict out;
        out["labels"] = res.labels;
        out["centroids"] = to_array(res.centroids, obs.d1(), obs.d2());
        out["iterations"] = res.iterations;
        out["converged"] = res.converged;
        out["objective"] = res.objective;
        return out;
      },
      py::arg("data"), py::arg("k"), py::arg("rank") = 1, py::arg("init") = "random", py::arg("max_iter") = 100,
      py::arg("seed") = 0);

  m.def(
      "recovery_check",
      [](const Array& data, const std::vector<int>& labels, const std::vector<std::tuple<Index, Index, double>>& edges,
         double gamma1, double gamma2) {
        const auto obs = to_obs(data);
        return json_to_py(to_json(recovery_check(obs, LabelVector::compact(labels), to_graph(obs.n(), edges), gamma1, gamma2)));
      },
      py::arg("data"), py::arg("labels"), py::arg("edges"), py::arg("gamma1"), py::arg("gamma2"));

  m.def("ari", &ari, py::arg("a"), py::arg("b"));
  m.def("nmi", &nmi, py::arg("a"), py::arg("b"));
  m.def("chi_cdf", &chi_cdf, py::arg("t"), py::arg("d"));
}
