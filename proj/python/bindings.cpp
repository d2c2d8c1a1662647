#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "cpr/baselines.hpp"
#include "cpr/core_signal.hpp"
#include "cpr/errors.hpp"
#include "cpr/experiments.hpp"
#include "cpr/ldp_mechanisms.hpp"
#include "cpr/period_detection.hpp"
#include "cpr/phase_recovery.hpp"

namespace py = pybind11;

namespace {

using Vec = std::vector<double>;

cpr::NormalizedSeries as_normalized(const Vec& v) { return cpr::NormalizedSeries(v); }

cpr::DetectionConfig detection_or_default(const std::optional<cpr::DetectionConfig>& det,
                                          std::size_t n) {
  return det ? *det : cpr::DetectionConfig::defaults_for(n);
}

py::dict report_to_dict(const cpr::TrialReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["epsilon"] = r.epsilon;
  d["w"] = r.w;
  d["trial"] = r.trial;
  d["T_hat"] = r.t_hat ? py::cast(*r.t_hat) : py::none();
  d["detection_failed"] = r.detection_failed;
  d["detected_correctly"] = r.detected_correctly;
  d["cosine_distance"] = r.cosine_distance ? py::cast(*r.cosine_distance) : py::none();
  d["wall_time_ms"] = r.wall_time_ms;
  return d;
}

py::list reports_to_list(const std::vector<cpr::TrialReport>& reports) {
  py::list out;
  for (const auto& r : reports) out.append(report_to_dict(r));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cycle and phase recovery for periodic streams under w-event LDP";

  py::register_exception<cpr::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<cpr::DetectionFailure>(m, "DetectionFailure", PyExc_RuntimeError);
  py::register_exception<cpr::IngestionError>(m, "IngestionError", PyExc_IOError);

  m.def("normalize", [](const Vec& x) { return cpr::normalize(cpr::RawSeries(x)).vec(); },
        py::arg("x"));
  m.def("period_loss", [](const Vec& x, std::size_t lag) { return cpr::period_loss(x, lag); },
        py::arg("x"), py::arg("T"));
  m.def("mirror_pad", [](const Vec& x, std::size_t p) { return cpr::mirror_pad(x, p); },
        py::arg("x"), py::arg("p"));
  m.def("tile_crop",
        [](const Vec& r, std::size_t n) { return cpr::tile_crop(cpr::CycleTemplate(r), n).vec(); },
        py::arg("template"), py::arg("n"));
  m.def("cosine_distance", [](const Vec& a, const Vec& b) { return cpr::cosine_distance(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("resample_linear", [](const Vec& x, std::size_t n) { return cpr::resample_linear(x, n); },
        py::arg("x"), py::arg("m"));

  py::class_<cpr::BudgetSplit>(m, "BudgetSplit")
      .def_readonly("epsilon", &cpr::BudgetSplit::epsilon)
      .def_readonly("w", &cpr::BudgetSplit::w)
      .def_readonly("eps0", &cpr::BudgetSplit::eps0);
  m.def("split_budget", &cpr::split_budget, py::arg("epsilon"), py::arg("w"));

  py::class_<cpr::SwParams>(m, "SwParams")
      .def_readonly("eps0", &cpr::SwParams::eps0)
      .def_readonly("b", &cpr::SwParams::b)
      .def_readonly("p", &cpr::SwParams::p)
      .def_readonly("q", &cpr::SwParams::q)
      .def_readonly("norm_factor", &cpr::SwParams::norm_factor)
      .def("high_mass", &cpr::SwParams::high_mass);
  m.def("sw_params", &cpr::sw_params, py::arg("eps0"));
  m.def("sw_density", &cpr::sw_density, py::arg("params"), py::arg("y"), py::arg("x"));

  m.def(
      "sw_perturb_series",
      [](const Vec& x, double epsilon, std::size_t w, std::uint64_t seed) {
        cpr::Rng rng(cpr::RngSeed{seed});
        return cpr::sw_perturb_series(as_normalized(x), cpr::split_budget(epsilon, w), rng).vec();
      },
      py::arg("x"), py::arg("epsilon"), py::arg("w"), py::arg("seed"));
  m.def(
      "laplace_perturb_series",
      [](const Vec& x, double epsilon, std::size_t w, std::uint64_t seed) {
        cpr::Rng rng(cpr::RngSeed{seed});
        const auto out =
            cpr::laplace_perturb_series(as_normalized(x), cpr::split_budget(epsilon, w), rng);
        return Vec(out.values().begin(), out.values().end());
      },
      py::arg("x"), py::arg("epsilon"), py::arg("w"), py::arg("seed"));

  py::class_<cpr::DetectionConfig>(m, "DetectionConfig")
      .def(py::init<>())
      .def_static("defaults_for", &cpr::DetectionConfig::defaults_for, py::arg("n"))
      .def_readwrite("scales", &cpr::DetectionConfig::scales)
      .def_readwrite("T_min", &cpr::DetectionConfig::t_min)
      .def_readwrite("T_max", &cpr::DetectionConfig::t_max)
      .def_readwrite("L", &cpr::DetectionConfig::peaks)
      .def_readwrite("tau", &cpr::DetectionConfig::tau)
      .def_readwrite("hann", &cpr::DetectionConfig::hann)
      .def_readwrite("refine", &cpr::DetectionConfig::refine)
      .def("validate", &cpr::DetectionConfig::validate);

  py::enum_<cpr::EmLikelihood>(m, "EmLikelihood")
      .value("point", cpr::EmLikelihood::point)
      .value("cell", cpr::EmLikelihood::cell);

  py::class_<cpr::EmConfig>(m, "EmConfig")
      .def(py::init<>())
      .def_readwrite("B", &cpr::EmConfig::grid_size)
      .def_readwrite("max_iters", &cpr::EmConfig::max_iters)
      .def_readwrite("tol", &cpr::EmConfig::tol)
      .def_readwrite("likelihood", &cpr::EmConfig::likelihood);

  m.def(
      "detect_period",
      [](const Vec& x_priv, std::optional<cpr::DetectionConfig> det) {
        return cpr::detect_period(as_normalized(x_priv), detection_or_default(det, x_priv.size()));
      },
      py::arg("x_priv"), py::arg("config") = py::none());

  m.def(
      "em_sw_decode",
      [](const Vec& obs, double eps0, std::optional<cpr::EmConfig> em) {
        const auto res = cpr::em_sw_decode(obs, cpr::sw_params(eps0), em.value_or(cpr::EmConfig{}));
        return py::make_tuple(res.pmf, res.pseudo_samples);
      },
      py::arg("observations"), py::arg("eps0"), py::arg("config") = py::none());
  m.def("kde_mode", [](const Vec& samples) { return cpr::kde_mode(samples); },
        py::arg("samples"));

  m.def(
      "cpr_recover",
      [](const Vec& x_priv, double eps0, std::optional<cpr::DetectionConfig> det,
         std::optional<cpr::EmConfig> em) {
        const auto rec = cpr::cpr_recover(as_normalized(x_priv), eps0,
                                          detection_or_default(det, x_priv.size()),
                                          em.value_or(cpr::EmConfig{}));
        return py::make_tuple(rec.x_hat.vec(), rec.t_hat);
      },
      py::arg("x_priv"), py::arg("eps0"), py::arg("detection") = py::none(),
      py::arg("em") = py::none());
  m.def(
      "cpr_reconstruct",
      [](const Vec& x_raw, double epsilon, std::size_t w, std::uint64_t seed,
         std::optional<cpr::DetectionConfig> det, std::optional<cpr::EmConfig> em) {
        cpr::Rng rng(cpr::RngSeed{seed});
        const auto rec = cpr::cpr_reconstruct(cpr::RawSeries(x_raw), epsilon, w,
                                              detection_or_default(det, x_raw.size()),
                                              em.value_or(cpr::EmConfig{}), rng);
        return py::make_tuple(rec.x_hat.vec(), rec.t_hat);
      },
      py::arg("x_raw"), py::arg("epsilon"), py::arg("w"), py::arg("seed"),
      py::arg("detection") = py::none(), py::arg("em") = py::none());

  m.def(
      "run_method",
      [](const std::string& method, const Vec& x_raw, double epsilon, std::size_t w,
         std::uint64_t seed) {
        cpr::ExperimentConfig config;
        cpr::Rng rng(cpr::RngSeed{seed});
        auto out = cpr::run_method(cpr::parse_method(method), cpr::RawSeries(x_raw), epsilon, w,
                                   config, rng);
        return py::make_tuple(out.x_hat.vec(), out.t_hat ? py::cast(*out.t_hat) : py::none());
      },
      py::arg("method"), py::arg("x_raw"), py::arg("epsilon"), py::arg("w"), py::arg("seed"));

  m.def(
      "run_detection_trials",
      [](const std::string& config_json) {
        return reports_to_list(cpr::run_detection_trials(cpr::parse_experiment_config(config_json)));
      },
      py::arg("config_json"));
  m.def(
      "run_reconstruction_sweep",
      [](const std::string& config_json) {
        return reports_to_list(
            cpr::run_reconstruction_sweep(cpr::parse_experiment_config(config_json)));
      },
      py::arg("config_json"));
}
