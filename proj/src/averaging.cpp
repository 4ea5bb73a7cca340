#include "fracavg/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadrature.hpp"

namespace fracavg {

namespace {

constexpr double kDiagnosticTolerance = 1e-3;

// int_a^b g(t) dt on panels of unit length or shorter.
Vector integrate_time(const std::function<Vector(double)>& g, double a, double b, double tol) {
  const double span = b - a;
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(span)));
  const double len = span / static_cast<double>(panels);
  Vector total;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + len * static_cast<double>(p);
    const double hi = p + 1 == panels ? b : lo + len;
    auto q = detail::gauss_kronrod(g, lo, hi, 1e-2 * tol, 1e-2 * tol * len);
    if (p == 0) {
      total = std::move(q.value);
    } else {
      total += q.value;
    }
  }
  return total;
}

Vector average_over(const std::function<Vector(double)>& g, double horizon, double tol) {
  if (!(horizon > 0.0)) throw std::invalid_argument("time_average: horizon must be positive");
  return integrate_time(g, 0.0, horizon, tol) / horizon;
}

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

ResidualEnvelope classify(std::vector<double> values) {
  ResidualEnvelope env;
  env.values = std::move(values);
  if (env.values.size() < 2) {
    env.status = DecayStatus::insufficient_data;
  } else if (std::all_of(env.values.begin(), env.values.end(), [](double v) { return v == 0.0; })) {
    env.status = DecayStatus::identically_zero;
  } else if (env.values.back() < 0.5 * env.values.front()) {
    env.status = DecayStatus::decays;
  } else {
    env.status = DecayStatus::no_decay;
  }
  return env;
}

bool truncated_range(const CoefficientSet& coeffs) {
  return coeffs.jump_mode == JumpMode::compensated_prm;
}

}  // namespace

TimeAverage time_average(const DriftFn& coefficient, const Vector& state, double horizon,
                         double tol) {
  if (!(horizon > 0.0)) throw std::invalid_argument("time_average: horizon must be positive");
  const std::function<Vector(double)> g = [&](double t) { return coefficient(t, state); };
  TimeAverage out;
  const Vector first = integrate_time(g, 0.0, horizon, tol);
  const Vector second = integrate_time(g, horizon, 2.0 * horizon, tol);
  out.value = first / horizon;
  out.value_double_horizon = (first + second) / (2.0 * horizon);
  out.diagnostic = (out.value - out.value_double_horizon).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, out.value.cwiseAbs().maxCoeff());
  out.converged = out.diagnostic <= kDiagnosticTolerance * scale;
  return out;
}

Vector averaged_jump_drift(const JumpMeasureSpec& spec, const JumpCoefficientFn& jump,
                           const Vector& state, double horizon) {
  spec.validate();
  const std::function<Vector(double)> g = [&](double t) {
    return nu_integral_vector(
        spec, [&](double x) { return jump(t, state, x); }, /*use_delta=*/false);
  };
  return average_over(g, horizon, kTimeAverageTolerance);
}

AveragedCoefficientSet build_averaged(const CoefficientSet& coeffs, double horizon,
                                      std::optional<double> fold_epsilon) {
  coeffs.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("build_averaged: horizon must be positive");
  const bool fold = fold_epsilon.has_value() && coeffs.has_jumps();
  if (fold) {
    if (coeffs.jump_mode != JumpMode::deterministic_nu_drift) {
      throw std::invalid_argument(
          "build_averaged: only a deterministic nu-drift can be folded into the drift");
    }
    if (!(*fold_epsilon > 0.0)) {
      throw std::invalid_argument("build_averaged: fold epsilon must be positive");
    }
  }

  AveragedCoefficientSet out;
  out.state_dim = coeffs.state_dim;
  out.noise_dim = coeffs.noise_dim;
  out.jump_mode = coeffs.jump_mode;
  out.jump_measure = coeffs.jump_measure;

  const double inv_sqrt_eps = fold ? 1.0 / std::sqrt(*fold_epsilon) : 0.0;
  out.drift = [coeffs, horizon, fold, inv_sqrt_eps](const Vector& x) -> Vector {
    Vector value = average_over([&](double t) { return coeffs.drift(t, x); }, horizon,
                                kTimeAverageTolerance);
    if (fold) {
      value += inv_sqrt_eps * averaged_jump_drift(*coeffs.jump_measure, coeffs.jump, x, horizon);
    }
    return value;
  };
  out.diffusion = [coeffs, horizon](const Vector& x) -> Matrix {
    const Vector flat = average_over([&](double t) { return flatten(coeffs.diffusion(t, x)); },
                                     horizon, kTimeAverageTolerance);
    return Eigen::Map<const Matrix>(flat.data(), static_cast<Eigen::Index>(coeffs.state_dim),
                                    static_cast<Eigen::Index>(coeffs.noise_dim));
  };
  if (coeffs.has_jumps() && !fold) {
    out.jump = [coeffs, horizon](const Vector& x, double mark) -> Vector {
      return average_over([&](double t) { return coeffs.jump(t, x, mark); }, horizon,
                          kTimeAverageTolerance);
    };
  }
  return out;
}

const char* to_string(DecayStatus status) {
  switch (status) {
    case DecayStatus::decays:
      return "decays";
    case DecayStatus::no_decay:
      return "no_decay";
    case DecayStatus::identically_zero:
      return "identically_zero";
    case DecayStatus::insufficient_data:
      return "insufficient_data";
  }
  return "unknown";
}

std::array<double, 3> HypothesisReport::alpha_sups() const {
  auto sup = [](const ResidualEnvelope& env) {
    return env.values.empty() ? 0.0 : *std::max_element(env.values.begin(), env.values.end());
  };
  return {sup(alpha1), sup(alpha2), sup(alpha3)};
}

std::vector<Vector> default_probe_states(std::size_t dim) {
  std::vector<Vector> probes;
  for (std::size_t axis = 0; axis < dim; ++axis) {
    for (int e = -2; e <= 2; ++e) {
      for (double sign : {1.0, -1.0}) {
        Vector x = Vector::Zero(static_cast<Eigen::Index>(dim));
        x[static_cast<Eigen::Index>(axis)] = sign * std::pow(10.0, e);
        probes.push_back(std::move(x));
      }
    }
  }
  return probes;
}

std::vector<double> default_probe_times(double horizon, std::size_t count) {
  std::vector<double> times(count);
  for (std::size_t i = 0; i < count; ++i) {
    times[i] = count == 1 ? 0.0 : horizon * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return times;
}

HypothesisReport h3_residuals(const CoefficientSet& coeffs, const AveragedCoefficientSet& averaged,
                              const std::vector<double>& t1_grid,
                              const std::vector<Vector>& probe_states) {
  coeffs.validate();
  if (probe_states.empty()) throw std::invalid_argument("h3_residuals: probe set is empty");
  for (double t1 : t1_grid) {
    if (!(t1 > 0.0)) throw std::invalid_argument("h3_residuals: T1 values must be positive");
  }

  HypothesisReport report;
  report.probe_states = probe_states;
  report.t1_grid = t1_grid;

  const bool jumps = coeffs.has_jumps();
  const bool use_delta = truncated_range(coeffs);
  std::vector<double> a1, a2, a3, p1;
  for (double t1 : t1_grid) {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, sp = 0.0;
    for (const Vector& x : probe_states) {
      const double norm = x.norm();
      const double lin = 1.0 + norm;
      const double quad = 1.0 + norm * norm;

      // Residuals are averaged directly so an already-averaged coefficient gives exactly 0.
      const Vector fbar = averaged.drift(x);
      const Vector fres = average_over([&](double t) { return Vector(coeffs.drift(t, x) - fbar); },
                                       t1, kTimeAverageTolerance);
      s1 = std::max(s1, fres.norm() / lin);
      sp = std::max(sp, (coeffs.drift(t1, x) - fbar).norm() / lin);

      const Matrix gbar = averaged.diffusion(x);
      const Matrix abar = gbar * gbar.transpose();
      const Vector ares = average_over(
          [&](double t) {
            const Matrix g = coeffs.diffusion(t, x);
            return flatten(g * g.transpose() - abar);
          },
          t1, kTimeAverageTolerance);
      const Matrix avg_res = Eigen::Map<const Matrix>(ares.data(), abar.rows(), abar.cols());
      s2 = std::max(s2, spectral_norm(avg_res) / quad);

      if (jumps) {
        const double r3 = nu_integral(
            *coeffs.jump_measure,
            [&](double m) {
              const Vector hbar =
                  averaged.jump ? averaged.jump(x, m) : Vector(Vector::Zero(x.size()));
              const Vector hres = average_over(
                  [&](double t) { return Vector(coeffs.jump(t, x, m) - hbar); }, t1,
                  kTimeAverageTolerance);
              return hres.squaredNorm();
            },
            use_delta);
        s3 = std::max(s3, r3 / quad);
      }
    }
    a1.push_back(s1);
    a2.push_back(s2);
    a3.push_back(s3);
    p1.push_back(sp);
  }
  report.alpha1 = classify(std::move(a1));
  report.alpha2 = classify(std::move(a2));
  report.alpha3 = classify(std::move(a3));
  report.pointwise_alpha1 = classify(std::move(p1));
  return report;
}

HypothesisReport check_hypotheses(const CoefficientSet& coeffs,
                                  const AveragedCoefficientSet& averaged,
                                  const std::vector<double>& t1_grid,
                                  const std::vector<Vector>& probe_states,
                                  const std::vector<double>& probe_times) {
  HypothesisReport report = h3_residuals(coeffs, averaged, t1_grid, probe_states);
  report.probe_times = probe_times;

  const bool jumps = coeffs.has_jumps();
  const bool use_delta = truncated_range(coeffs);
  double c1 = 0.0;
  double c2 = 0.0;
  for (double t : probe_times) {
    for (std::size_t i = 0; i < probe_states.size(); ++i) {
      const Vector& x1 = probe_states[i];
      const Vector f1 = coeffs.drift(t, x1);
      const Matrix g1 = coeffs.diffusion(t, x1);
      const Matrix a11 = g1 * g1.transpose();

      double growth = std::max(f1.squaredNorm(), spectral_norm(a11));
      if (jumps) {
        growth = std::max(growth, nu_integral(
                                      *coeffs.jump_measure,
                                      [&](double m) { return coeffs.jump(t, x1, m).squaredNorm(); },
                                      use_delta));
      }
      c2 = std::max(c2, growth / (1.0 + x1.squaredNorm()));

      for (std::size_t k = i + 1; k < probe_states.size(); ++k) {
        const Vector& x2 = probe_states[k];
        const double dist2 = (x1 - x2).squaredNorm();
        if (dist2 == 0.0) continue;
        const Matrix g2 = coeffs.diffusion(t, x2);
        double q = (f1 - coeffs.drift(t, x2)).squaredNorm();
        q = std::max(q, spectral_norm(a11 - 2.0 * g1 * g2.transpose() + g2 * g2.transpose()));
        if (jumps) {
          q = std::max(q, nu_integral(
                              *coeffs.jump_measure,
                              [&](double m) {
                                return (coeffs.jump(t, x1, m) - coeffs.jump(t, x2, m))
                                    .squaredNorm();
                              },
                              use_delta));
        }
        c1 = std::max(c1, q / dist2);
      }
    }
  }
  report.lipschitz_estimate = c1;
  report.growth_estimate = c2;
  return report;
}

void BoundInputs::validate() const {
  FractionalOrder{beta};
  if (!(c1 >= 0.0)) throw std::invalid_argument("theorem_bound: C1 must be nonnegative");
  for (double a : alpha_sups) {
    if (!(a >= 0.0)) throw std::invalid_argument("theorem_bound: alpha sups must be nonnegative");
  }
  if (!(z_moment >= 1.0)) throw std::invalid_argument("theorem_bound: z_moment must be >= 1");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("theorem_bound: lambda must lie in (0, 1)");
  }
  if (!(L > 0.0)) throw std::invalid_argument("theorem_bound: L must be positive");
}

BoundReport theorem_bound(const BoundInputs& inputs, std::span<const double> epsilons) {
  inputs.validate();
  const double b = inputs.beta;
  const double gb = gamma_fn(b);
  const double gb2 = gb * gb;
  const double lam = inputs.lambda;
  const double L = inputs.L;
  const auto& al = inputs.alpha_sups;

  BoundReport report;
  report.inputs = inputs;
  report.k11 = 6.0 * inputs.c1 * inputs.c1 / gb2;
  report.k21 = report.k11;
  report.k31 = report.k11;
  report.k12 = 12.0 / (b * b * gb2) * al[0] * al[0] * inputs.z_moment;
  report.k22 = 6.0 / ((2.0 * b - 1.0) * gb2) * al[1] * inputs.z_moment;
  report.k32 = 6.0 / ((2.0 * b - 1.0) * gb2) * al[2] * inputs.z_moment;

  for (double eps : epsilons) {
    if (!(eps > 0.0 && eps <= kEpsilonMax)) {
      std::ostringstream os;
      os << "theorem_bound: epsilon must lie in (0, " << kEpsilonMax << "], got " << eps;
      throw std::invalid_argument(os.str());
    }
    BoundPoint p;
    p.epsilon = eps;
    p.prefactor = report.k12 * std::pow(L, 2.0 * b) * std::pow(eps, 1.0 + lam - 2.0 * b * lam) +
                  (report.k22 + report.k32) * std::pow(L, 2.0 * b - 1.0) *
                      std::pow(eps, 2.0 * lam * (1.0 - b));
    p.series_argument = (report.k11 * std::pow(L, 1.0 + b) * std::pow(eps, 2.0 - lam - b * lam) +
                         (report.k21 + report.k31) * std::pow(L, b) * std::pow(eps, 1.0 - b * lam)) *
                        gb;
    if (p.prefactor == 0.0) {
      // A zero prefactor annihilates the series whatever its value.
      p.series = 0.0;
      p.series_terms = 0;
    } else {
      const SeriesSum s = mittag_leffler_series(b, p.series_argument);
      p.series = s.value;
      p.series_terms = s.terms;
    }
    p.constant = p.prefactor * p.series;
    p.bound = p.constant * std::pow(eps, 1.0 - lam);
    report.points.push_back(p);
  }
  return report;
}

double theorem_bound_value(const BoundInputs& inputs, double epsilon) {
  const double eps[] = {epsilon};
  return theorem_bound(inputs, eps).points.front().bound;
}

namespace {

nlohmann::json envelope_json(const ResidualEnvelope& env) {
  return {{"values", env.values}, {"status", to_string(env.status)}};
}

}  // namespace

void to_json(nlohmann::json& j, const HypothesisReport& report) {
  nlohmann::json probes = nlohmann::json::array();
  for (const Vector& x : report.probe_states) {
    probes.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  j = nlohmann::json{
      {"probe_states", probes},
      {"probe_times", report.probe_times},
      {"t1_grid", report.t1_grid},
      {"lipschitz_estimate_C1", report.lipschitz_estimate ? nlohmann::json(*report.lipschitz_estimate)
                                                           : nlohmann::json(nullptr)},
      {"growth_estimate_C2", report.growth_estimate ? nlohmann::json(*report.growth_estimate)
                                                    : nlohmann::json(nullptr)},
      {"alpha1", envelope_json(report.alpha1)},
      {"alpha2", envelope_json(report.alpha2)},
      {"alpha3", envelope_json(report.alpha3)},
      {"pointwise_alpha1", envelope_json(report.pointwise_alpha1)},
      {"estimates_are_lower_bounds", true},
  };
}

void to_json(nlohmann::json& j, const BoundReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points) {
    points.push_back({{"epsilon", p.epsilon},
                      {"prefactor", p.prefactor},
                      {"series_argument", p.series_argument},
                      {"series", p.series},
                      {"series_terms", p.series_terms},
                      {"constant_C", p.constant},
                      {"bound", p.bound}});
  }
  const auto& in = report.inputs;
  j = nlohmann::json{
      {"inputs",
       {{"C1", in.c1},
        {"alpha_sups", in.alpha_sups},
        {"z_moment", in.z_moment},
        {"beta", in.beta},
        {"lambda", in.lambda},
        {"L", in.L}}},
      {"K11", report.k11},
      {"K12", report.k12},
      {"K21", report.k21},
      {"K22", report.k22},
      {"K31", report.k31},
      {"K32", report.k32},
      {"points", points},
  };
}

}  // namespace fracavg
