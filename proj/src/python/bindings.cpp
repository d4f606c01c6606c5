#include <numeric>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wfair/bench.hpp"
#include "wfair/data_pipeline.hpp"
#include "wfair/empirical_ot.hpp"
#include "wfair/error.hpp"
#include "wfair/fairness_metrics.hpp"
#include "wfair/logistic_model.hpp"
#include "wfair/penalized_trainer.hpp"
#include "wfair/post_processor.hpp"

namespace py = pybind11;
using namespace wfair;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) { return {a.data(), a.data() + a.size()}; }
std::vector<int> to_ivec(const IntArray& a) { return {a.data(), a.data() + a.size()}; }
Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

EmpiricalDist dist(const Array& a) { return EmpiricalDist::from_samples(to_vec(a)); }

Dataset make_dataset(const Array& x, const IntArray& a, const IntArray& y, const IntArray& group) {
  require(x.ndim() == 2, "x must be a 2-d array");
  require(a.ndim() == 2, "a must be a 2-d array");
  Dataset d;
  d.n = static_cast<std::size_t>(x.shape(0));
  d.d = static_cast<std::size_t>(x.shape(1));
  d.k = static_cast<std::size_t>(a.shape(1));
  require(static_cast<std::size_t>(a.shape(0)) == d.n, "a must have one row per individual");
  d.x = to_vec(x);
  d.a = to_ivec(a);
  d.y = to_ivec(y);
  d.group_of = to_ivec(group);
  for (std::size_t j = 0; j < d.d; ++j) d.feature_names.push_back("x" + std::to_string(j));
  for (std::size_t j = 0; j < d.k; ++j) d.attribute_names.push_back("a" + std::to_string(j));
  d.finalize();
  return d;
}

py::dict summary_dict(const MetricSummary& m) {
  py::dict out;
  out["err_05"] = m.err_05;
  out["err_exp"] = m.err_exp;
  out["dd_05"] = m.dd_05;
  out["sdd"] = m.sdd;
  out["spdd"] = m.spdd;
  out["spdd_unordered"] = m.spdd_unordered;
  out["pseudo_spdd"] = m.pseudo_spdd;
  return out;
}

py::dict point_dict(const TrajectoryPoint& p) {
  py::dict out;
  out["step"] = p.step;
  out["err_05"] = p.err_05;
  out["err_exp"] = p.err_exp;
  out["dd_05"] = p.dd_05;
  out["sdd"] = p.sdd;
  out["spdd"] = p.spdd;
  out["pseudo_spdd"] = p.pseudo_spdd;
  out["objective"] = p.objective;
  out["group_w1"] = p.group_w1;
  return out;
}

GroupedBeliefs grouped(const Array& beliefs, const IntArray& group) {
  const auto b = to_vec(beliefs);
  const auto g = to_ivec(group);
  return GroupedBeliefs::from_individuals(b, g);
}

}  // namespace

PYBIND11_MODULE(_wfair, m) {
  m.doc() = "Wasserstein-1 fair classification";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("wasserstein1", [](const Array& b, const Array& c) { return wasserstein1(dist(b), dist(c)); });
  m.def("wasserstein1_quantile_form",
        [](const Array& b, const Array& c) { return wasserstein1_quantile_form(dist(b), dist(c)); });
  m.def("threshold_disparity", [](const Array& b, const Array& c) { return threshold_disparity(dist(b), dist(c)); });
  m.def("optimal_coupling", [](const Array& b, const Array& c) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    for (const auto& e : optimal_coupling(dist(b), dist(c)).entries) out.emplace_back(e.row, e.col, e.mass);
    return out;
  }, "Sparse monotone coupling of the sorted samples as (row, col, mass) triples.");
  m.def("barycenter", [](const std::vector<Array>& groups, std::optional<Array> weights, std::size_t resolution) {
    std::vector<EmpiricalDist> dists;
    std::vector<double> w;
    for (const auto& g : groups) {
      dists.push_back(dist(g));
      w.push_back(static_cast<double>(g.size()));
    }
    if (weights) w = to_vec(*weights);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;
    const auto bary = barycenter(dists, w, resolution);
    return to_array({bary.atoms().begin(), bary.atoms().end()});
  }, py::arg("groups"), py::arg("weights") = py::none(), py::arg("resolution") = 100);

  m.def("summarize", [](const Array& beliefs, const IntArray& labels, const IntArray& group) {
    const auto b = to_vec(beliefs);
    const auto y = to_ivec(labels);
    const auto g = to_ivec(group);
    return summary_dict(summarize(b, y, g));
  }, py::arg("beliefs"), py::arg("labels"), py::arg("group"));
  m.def("sdd", [](const Array& b, const IntArray& g) { return sdd(grouped(b, g), ThresholdGrid::midpoints()); });
  m.def("spdd", [](const Array& b, const IntArray& g) { return spdd(grouped(b, g), ThresholdGrid::midpoints()); });
  m.def("sdd_exact", [](const Array& b, const IntArray& g) { return sdd_exact(grouped(b, g)); });
  m.def("spdd_exact", [](const Array& b, const IntArray& g) { return spdd_exact(grouped(b, g)); });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("x"), py::arg("a"), py::arg("y"), py::arg("group"))
      .def_readonly("n", &Dataset::n)
      .def_readonly("d", &Dataset::d)
      .def_readonly("k", &Dataset::k)
      .def_readonly("group_sizes", &Dataset::group_sizes)
      .def_readonly("feature_names", &Dataset::feature_names)
      .def_property_readonly("x", [](const Dataset& d) {
        return Array({static_cast<py::ssize_t>(d.n), static_cast<py::ssize_t>(d.d)}, d.x.data());
      })
      .def_property_readonly("y", [](const Dataset& d) { return d.y; })
      .def_property_readonly("group", [](const Dataset& d) { return d.group_of; });

  m.def("fit_baseline", [](const Dataset& data, const std::string& mode) {
    return to_array(fit_baseline(data, feature_mode_from_string(mode)).params.theta);
  }, py::arg("data"), py::arg("mode") = "full");
  m.def("beliefs", [](const Array& theta, const Dataset& data, const std::string& mode) {
    ModelParams p{to_vec(theta), feature_mode_from_string(mode)};
    p.validate(data.d, data.k);
    return to_array(beliefs(p, data));
  }, py::arg("theta"), py::arg("data"), py::arg("mode") = "full");
  m.def("train", [](const Dataset& data, const std::string& config, std::optional<Array> init,
                    const Dataset* held_out) {
    const TrainConfig cfg = bench::parse_config(config);
    ModelParams p = init ? ModelParams{to_vec(*init), cfg.mode} : fit_baseline(data, cfg.mode).params;
    TrainResult r;
    {
      py::gil_scoped_release release;
      r = train(data, cfg, p, held_out);
    }
    py::list points;
    for (const auto& pt : r.trajectory) points.append(point_dict(pt));
    return py::make_tuple(to_array(r.params.theta), points);
  }, py::arg("data"), py::arg("config") = "", py::arg("init") = py::none(), py::arg("held_out") = nullptr,
     "Penalized training; `config` is key = value text. Starts from the unconstrained fit unless `init` is given.");

  m.def("quantile_match", [](const Array& beliefs, const IntArray& group, const std::string& target,
                             std::size_t bins, std::optional<Array> apply_beliefs, std::optional<IntArray> apply_group) {
    const auto ref = grouped(beliefs, group);
    const auto map =
        QuantileMap::fit(ref, post_target(ref, post_target_from_string(target)), QuantileBins::make(bins));
    const auto b = to_vec(apply_beliefs ? *apply_beliefs : beliefs);
    const auto g = to_ivec(apply_group ? *apply_group : group);
    return to_array(map.apply(b, g));
  }, py::arg("beliefs"), py::arg("group"), py::arg("target") = "barycenter", py::arg("bins") = 100,
     py::arg("apply_beliefs") = py::none(), py::arg("apply_group") = py::none(),
     "Fit per-group quantile maps on (beliefs, group) and apply them, by default to the same beliefs.");

  m.def("prepare_dataset", [](const std::string& name, const std::string& data_dir, std::uint64_t seed, bool verify) {
    auto p = prepare_dataset(name, resolve_data_dir(data_dir), seed, verify);
    return py::make_tuple(std::move(p.train), std::move(p.test), p.report.describe());
  }, py::arg("name"), py::arg("data_dir") = "", py::arg("seed") = 0, py::arg("verify") = true);
  m.def("synthetic_split", [](std::uint64_t seed) {
    auto s = bench::synthetic_split(seed);
    return py::make_tuple(std::move(s.train), std::move(s.test));
  }, py::arg("seed") = 0);
}
