#include "fracavg/problems.hpp"

#include <cmath>
#include <memory>

#include "fracavg/averaging.hpp"
#include "fracavg/expression.hpp"

namespace fracavg {

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

JumpMeasureSpec measure_of(const ExperimentConfig& c) {
  return JumpMeasureSpec{c.gamma, c.alpha, c.cutoff_c, c.effective_delta()};
}

nlohmann::json measure_json(const JumpMeasureSpec& m) {
  return {{"gamma", m.gamma},
          {"alpha", m.alpha},
          {"cutoff_c", m.cutoff_c},
          {"cutoff_delta", m.cutoff_delta}};
}

Problem eq10(const ExperimentConfig& c) {
  Problem p;
  p.name = "eq10";
  const JumpMeasureSpec measure = measure_of(c);
  const double g1 = stable_jump_gamma1(c.gamma, c.alpha, c.cutoff_c, c.epsilon);
  p.gamma1 = g1;

  CoefficientSet& o = p.original;
  o.drift = [](double t, const Vector& x) -> Vector {
    const double ct = std::cos(t);
    return 2.0 * ct * ct * x;
  };
  o.diffusion = [](double, const Vector&) { return scalar_matrix(1.0); };
  o.jump = [](double t, const Vector& x, double m) -> Vector {
    const double st = std::sin(t);
    const double m2 = m * m;
    return 2.0 * m2 * m2 * st * st * x;
  };
  o.jump_mode = JumpMode::deterministic_nu_drift;
  o.jump_measure = measure;

  AveragedCoefficientSet& a = p.averaged;
  a.drift = [g1](const Vector& z) -> Vector { return (1.0 + g1) * z; };
  a.diffusion = [](const Vector&) { return scalar_matrix(1.0); };
  a.jump_mode = JumpMode::deterministic_nu_drift;
  a.jump_measure = measure;

  AveragedCoefficientSet& comp = p.averaged_components;
  comp.drift = [](const Vector& z) -> Vector { return z; };
  comp.diffusion = [](const Vector&) { return scalar_matrix(1.0); };
  comp.jump = [](const Vector& z, double m) -> Vector {
    const double m2 = m * m;
    return m2 * m2 * z;
  };
  comp.jump_mode = JumpMode::deterministic_nu_drift;
  comp.jump_measure = measure;

  p.parameters = {{"beta", c.beta},   {"alpha", c.alpha},         {"gamma", c.gamma},
                  {"cutoff_c", c.cutoff_c}, {"epsilon", c.epsilon}, {"x0", c.x0},
                  {"gamma1", g1},     {"jump_measure", measure_json(measure)},
                  {"jump_mode", to_string(o.jump_mode)}};
  if (!c.fig_case.empty()) p.parameters["case"] = c.fig_case;
  return p;
}

Problem eq10_linear(const ExperimentConfig& c) {
  Problem p;
  p.name = "eq10-linear";
  p.original.drift = [](double t, const Vector& x) -> Vector {
    const double ct = std::cos(t);
    return ct * ct * x;
  };
  p.original.diffusion = [](double, const Vector&) { return scalar_matrix(1.0); };
  p.averaged.drift = [](const Vector& z) -> Vector { return 0.5 * z; };
  p.averaged.diffusion = [](const Vector&) { return scalar_matrix(1.0); };
  p.averaged_components = p.averaged;
  p.parameters = {{"beta", c.beta}, {"epsilon", c.epsilon}, {"x0", c.x0}};
  return p;
}

Problem mittag_leffler_benchmark(const ExperimentConfig& c) {
  Problem p;
  p.name = "mittag-leffler";
  const double rate = c.rate;
  p.original.drift = [rate](double, const Vector& x) -> Vector { return rate * x; };
  p.original.diffusion = [](double, const Vector&) { return scalar_matrix(0.0); };
  p.averaged.drift = [rate](const Vector& z) -> Vector { return rate * z; };
  p.averaged.diffusion = [](const Vector&) { return scalar_matrix(0.0); };
  p.averaged_components = p.averaged;
  p.parameters = {{"beta", c.beta}, {"epsilon", c.epsilon}, {"x0", c.x0}, {"rate", rate}};
  return p;
}

std::shared_ptr<const Expression> compile(const std::string& key, const std::string& text,
                                          std::vector<std::string> vars) {
  try {
    return std::make_shared<const Expression>(Expression::parse(text, std::move(vars)));
  } catch (const ExpressionError& e) {
    throw ConfigError(key, e.what());
  }
}

Problem custom(const ExperimentConfig& c) {
  if (c.f.empty()) throw ConfigError("f", "the custom problem needs an f(t, x) expression");
  Problem p;
  p.name = "custom";
  CoefficientSet& o = p.original;
  const auto f = compile("f", c.f, {"t", "x"});
  const auto g = compile("g", c.g, {"t", "x"});
  o.drift = [f](double t, const Vector& x) {
    const double v[] = {t, x[0]};
    return scalar(f->evaluate(v));
  };
  o.diffusion = [g](double t, const Vector& x) {
    const double v[] = {t, x[0]};
    return scalar_matrix(g->evaluate(v));
  };
  o.jump_mode = jump_mode_from_string(c.jump_mode);
  if (!c.h.empty()) {
    const auto h = compile("h", c.h, {"t", "x", "m"});
    o.jump = [h](double t, const Vector& x, double m) {
      const double v[] = {t, x[0], m};
      return scalar(h->evaluate(v));
    };
    o.jump_measure = measure_of(c);
  }

  const AveragedCoefficientSet numeric = build_averaged(o, c.average_horizon);
  AveragedCoefficientSet& a = p.averaged;
  a = numeric;
  if (c.fbar != "auto") {
    const auto fbar = compile("fbar", c.fbar, {"x"});
    a.drift = [fbar](const Vector& x) {
      const double v[] = {x[0]};
      return scalar(fbar->evaluate(v));
    };
  }
  if (c.gbar != "auto") {
    const auto gbar = compile("gbar", c.gbar, {"x"});
    a.diffusion = [gbar](const Vector& x) {
      const double v[] = {x[0]};
      return scalar_matrix(gbar->evaluate(v));
    };
  }
  if (o.jump && c.hbar != "auto") {
    const auto hbar = compile("hbar", c.hbar, {"x", "m"});
    a.jump = [hbar](const Vector& x, double m) {
      const double v[] = {x[0], m};
      return scalar(hbar->evaluate(v));
    };
  }
  p.averaged_components = a;

  p.parameters = {{"f", c.f},       {"g", c.g},       {"h", c.h},
                  {"fbar", c.fbar}, {"gbar", c.gbar}, {"hbar", c.hbar},
                  {"beta", c.beta}, {"epsilon", c.epsilon}, {"x0", c.x0},
                  {"jump_mode", to_string(o.jump_mode)}};
  if (o.jump_measure) p.parameters["jump_measure"] = measure_json(*o.jump_measure);
  return p;
}

}  // namespace

bool Problem::needs_jump_events() const {
  auto compensated = [](bool has, JumpMode mode) {
    return has && mode == JumpMode::compensated_prm;
  };
  return compensated(original.has_jumps(), original.jump_mode) ||
         compensated(static_cast<bool>(averaged.jump), averaged.jump_mode);
}

const std::vector<std::string>& builtin_problems() {
  static const std::vector<std::string> names = {"eq10", "eq10-linear", "mittag-leffler",
                                                 "custom"};
  return names;
}

double stable_jump_gamma1(double gamma, double alpha, double cutoff_c, double epsilon) {
  return gamma * std::pow(cutoff_c, 4.0 - alpha) / (std::sqrt(epsilon) * (4.0 - alpha));
}

Problem make_problem(const ExperimentConfig& config) {
  validate(config);
  Problem p;
  if (config.problem == "eq10") {
    p = eq10(config);
  } else if (config.problem == "eq10-linear") {
    p = eq10_linear(config);
  } else if (config.problem == "mittag-leffler") {
    p = mittag_leffler_benchmark(config);
  } else if (config.problem == "custom") {
    p = custom(config);
  } else {
    throw ConfigError("problem", "unknown problem '" + config.problem +
                                     "' (expected eq10, eq10-linear, mittag-leffler or custom)");
  }
  p.x0 = Vector::Constant(1, config.x0);
  p.beta = FractionalOrder(config.beta);
  p.parameters["problem"] = p.name;
  return p;
}

}  // namespace fracavg
