#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>

#include "fracavg/averaging.hpp"
#include "fracavg/config.hpp"
#include "fracavg/frackernel.hpp"
#include "fracavg/harness.hpp"
#include "fracavg/levy.hpp"
#include "fracavg/problems.hpp"

namespace py = pybind11;
using namespace fracavg;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::string as_config_value(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::float_>(v)) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v.cast<double>());
    return buf;
  }
  if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
    std::string out;
    for (const auto& item : v) out += (out.empty() ? "" : ",") + as_config_value(item);
    return out;
  }
  return py::str(v).cast<std::string>();
}

ExperimentConfig config_from(const py::dict& values) {
  ExperimentConfig cfg;
  // "case" first so explicit fields override it.
  if (values.contains("case")) set_field(cfg, "case", as_config_value(values["case"]));
  for (const auto& [k, v] : values) {
    const auto key = k.cast<std::string>();
    if (key != "case") set_field(cfg, key, as_config_value(v));
  }
  validate(cfg);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Caputo fractional SDEs with small-jump Levy noise and their averaged systems";
  m.attr("__version__") = FRACAVG_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<SeriesDivergenceError>(m, "SeriesDivergenceError", PyExc_ArithmeticError);
  py::register_exception<EnsembleError>(m, "EnsembleError", PyExc_RuntimeError);
  py::register_exception<InsufficientResolutionError>(m, "InsufficientResolutionError", PyExc_RuntimeError);

  m.def("gamma_fn", &gamma_fn, py::arg("x"));
  m.def("mittag_leffler", &mittag_leffler, py::arg("beta"), py::arg("z"), py::arg("tol") = 1e-16,
        py::arg("max_terms") = kMittagLefflerMaxTerms);
  m.def(
      "kernel_weights",
      [](double beta, double step, std::size_t n) {
        return build_kernel_weights(FractionalOrder(beta), step, n).weights;
      },
      py::arg("beta"), py::arg("step"), py::arg("n"),
      "Exact integrals of (t_n - s)^(beta - 1) over each grid cell [t_j, t_j+1].");

  py::class_<JumpMeasureSpec>(m, "JumpMeasureSpec")
      .def(py::init([](double gamma, double alpha, double cutoff_c, std::optional<double> cutoff_delta) {
             JumpMeasureSpec s = cutoff_delta ? JumpMeasureSpec{gamma, alpha, cutoff_c, *cutoff_delta}
                                              : JumpMeasureSpec::with_default_delta(gamma, alpha, cutoff_c);
             s.validate();
             return s;
           }),
           py::arg("gamma"), py::arg("alpha"), py::arg("cutoff_c"), py::arg("cutoff_delta") = py::none())
      .def_readonly("gamma", &JumpMeasureSpec::gamma)
      .def_readonly("alpha", &JumpMeasureSpec::alpha)
      .def_readonly("cutoff_c", &JumpMeasureSpec::cutoff_c)
      .def_readonly("cutoff_delta", &JumpMeasureSpec::cutoff_delta)
      .def("intensity", &JumpMeasureSpec::intensity)
      .def("mark_quantile", &JumpMeasureSpec::mark_quantile, py::arg("u"));

  m.def("nu_integral", &nu_integral, py::arg("spec"), py::arg("integrand"), py::arg("use_delta") = false,
        py::arg("rel_tol") = kNuIntegralTolerance);
  m.def("stable_jump_gamma1", &stable_jump_gamma1, py::arg("gamma"), py::arg("alpha"), py::arg("cutoff_c"),
        py::arg("epsilon"));

  m.def(
      "theorem_bound",
      [](double c1, std::array<double, 3> alphas, double z_moment, double beta, std::vector<double> epsilons,
         double lambda, double L) {
        BoundInputs in{c1, alphas, z_moment, beta, lambda, L};
        return to_python(theorem_bound(in, epsilons));
      },
      py::arg("c1"), py::arg("alphas"), py::arg("z_moment"), py::arg("beta"), py::arg("epsilons"),
      py::arg("lam") = 0.5, py::arg("L") = 1.0);

  m.def(
      "run_ensemble",
      [](const py::dict& config) {
        const ExperimentConfig cfg = config_from(config);
        EnsembleResult result;
        {
          py::gil_scoped_release release;
          result = run_ensemble(cfg);
        }
        return to_python(result.report);
      },
      py::arg("config"), "Runs a coupled ensemble; config keys are the config-file keys.");

  m.def(
      "convergence_study",
      [](const py::dict& config, std::vector<double> epsilons) {
        const ExperimentConfig cfg = config_from(config);
        StudyReport study;
        {
          py::gil_scoped_release release;
          study = convergence_study(cfg, std::move(epsilons));
        }
        return to_python(study);
      },
      py::arg("config"), py::arg("epsilons"));
}
