#include "fracavg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fracavg {

const char* to_string(JumpMode mode) {
  switch (mode) {
    case JumpMode::compensated_prm:
      return "compensated_prm";
    case JumpMode::deterministic_nu_drift:
      return "deterministic_nu_drift";
  }
  return "unknown";
}

JumpMode jump_mode_from_string(const std::string& name) {
  if (name == "compensated_prm") return JumpMode::compensated_prm;
  if (name == "deterministic_nu_drift") return JumpMode::deterministic_nu_drift;
  throw std::invalid_argument("unknown jump mode '" + name +
                              "' (expected compensated_prm or deterministic_nu_drift)");
}

void CoefficientSet::validate() const {
  if (state_dim < 1 || noise_dim < 1) {
    throw std::invalid_argument("CoefficientSet: dimensions must be at least 1");
  }
  if (!drift || !diffusion) {
    throw std::invalid_argument("CoefficientSet: drift and diffusion evaluators are required");
  }
  if (jump) {
    if (!jump_measure) {
      throw std::invalid_argument("CoefficientSet: a jump coefficient needs a jump measure");
    }
    jump_measure->validate();
  }
}

CoefficientSet AveragedCoefficientSet::as_time_dependent() const {
  CoefficientSet out;
  out.state_dim = state_dim;
  out.noise_dim = noise_dim;
  if (drift) out.drift = [f = drift](double, const Vector& x) { return f(x); };
  if (diffusion) out.diffusion = [g = diffusion](double, const Vector& x) { return g(x); };
  if (jump) {
    out.jump = [h = jump](double, const Vector& x, double mark) { return h(x, mark); };
  }
  out.jump_mode = jump_mode;
  out.jump_measure = jump_measure;
  return out;
}

SolverError::SolverError(const std::string& system, std::size_t step, const std::string& what)
    : std::runtime_error(system + " system failed at step " + std::to_string(step) + ": " + what),
      system_(system),
      step_(step) {}

namespace {

GridPath solve_impl(const CoefficientSet& coeffs, const NoiseRealization& noise, const Vector& x0,
                    double epsilon, FractionalOrder beta, std::size_t n_steps,
                    const std::string& label) {
  coeffs.validate();
  if (!(epsilon >= 0.0 && epsilon <= kEpsilonMax)) {
    std::ostringstream os;
    os << "epsilon must lie in [0, " << kEpsilonMax << "], got " << epsilon;
    throw std::invalid_argument(os.str());
  }
  if (static_cast<std::size_t>(x0.size()) != coeffs.state_dim) {
    throw std::invalid_argument("initial state dimension does not match the coefficients");
  }
  if (noise.dim != coeffs.noise_dim) {
    throw std::invalid_argument("noise dimension does not match the diffusion coefficient");
  }
  if (n_steps == 0) n_steps = noise.grid.n_steps;
  if (n_steps > noise.grid.n_steps) {
    throw std::invalid_argument("requested path is longer than the noise grid");
  }
  const bool compensated = coeffs.has_jumps() && coeffs.jump_mode == JumpMode::compensated_prm;
  const bool nu_drift = coeffs.has_jumps() && coeffs.jump_mode == JumpMode::deterministic_nu_drift;
  if (compensated && !noise.jump_measure) {
    throw std::invalid_argument("compensated jumps need a noise realization with jump events");
  }

  const std::size_t d = coeffs.state_dim;
  const double h = noise.grid.step;
  const double sqrt_eps = std::sqrt(epsilon);
  const double inv_gamma = 1.0 / gamma_fn(beta.value());
  const KernelTable kernel(beta, h, std::max<std::size_t>(n_steps, 1));

  GridPath path;
  path.epsilon = epsilon;
  path.times.resize(n_steps + 1);
  path.states.resize(n_steps + 1);
  for (std::size_t n = 0; n <= n_steps; ++n) path.times[n] = noise.grid.time(n);
  path.states[0] = x0;

  // Deterministic (D) and stochastic (S) contributions of each step.
  std::vector<double> det(n_steps * d, 0.0);
  std::vector<double> sto(n_steps * d, 0.0);

  auto jump_it = noise.jumps.begin();
  Vector acc(d);

  for (std::size_t n = 1; n <= n_steps; ++n) {
    const std::size_t j = n - 1;
    const double tj = path.times[j];
    const Vector& xj = path.states[j];

    Vector dj = epsilon * coeffs.drift(tj, xj);
    const auto db = noise.increment(j);
    Vector sj = coeffs.diffusion(tj, xj) *
                Eigen::Map<const Vector>(db.data(), static_cast<Eigen::Index>(db.size()));

    if (nu_drift) {
      dj += sqrt_eps * nu_integral_vector(
                           *coeffs.jump_measure, [&](double x) { return coeffs.jump(tj, xj, x); },
                           /*use_delta=*/false);
    }
    if (compensated) {
      const double step_end = path.times[n];
      while (jump_it != noise.jumps.end() && jump_it->time < step_end) {
        sj += coeffs.jump(tj, xj, jump_it->mark);
        ++jump_it;
      }
      sj -= compensator_increment(*coeffs.jump_measure, coeffs.jump, tj, xj, h);
    }
    sj *= sqrt_eps;

    std::copy(dj.data(), dj.data() + d, det.begin() + static_cast<std::ptrdiff_t>(j * d));
    std::copy(sj.data(), sj.data() + d, sto.begin() + static_cast<std::ptrdiff_t>(j * d));

    acc.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lag = n - i;
      const double w = kernel.integral_weight(lag);
      const double b = kernel.point_weight(lag);
      const double* di = det.data() + i * d;
      const double* si = sto.data() + i * d;
      for (std::size_t k = 0; k < d; ++k) acc[static_cast<Eigen::Index>(k)] += w * di[k] + b * si[k];
    }
    Vector xn = x0 + inv_gamma * acc;
    if (!xn.allFinite()) throw SolverError(label, n, "non-finite state");
    path.states[n] = std::move(xn);
  }
  return path;
}

}  // namespace

GridPath solve_original(const CoefficientSet& coeffs, const NoiseRealization& noise,
                        const Vector& x0, double epsilon, FractionalOrder beta,
                        std::size_t n_steps) {
  return solve_impl(coeffs, noise, x0, epsilon, beta, n_steps, "original");
}

GridPath solve_averaged(const AveragedCoefficientSet& coeffs, const NoiseRealization& noise,
                        const Vector& x0, double epsilon, FractionalOrder beta,
                        std::size_t n_steps) {
  return solve_impl(coeffs.as_time_dependent(), noise, x0, epsilon, beta, n_steps, "averaged");
}

CoupledResult solve_coupled(const CoefficientSet& coeffs, const AveragedCoefficientSet& averaged,
                            const NoiseRealization& noise, const Vector& x0, double epsilon,
                            FractionalOrder beta, std::size_t n_steps) {
  CoupledResult out;
  out.original = solve_original(coeffs, noise, x0, epsilon, beta, n_steps);
  out.averaged = solve_averaged(averaged, noise, x0, epsilon, beta, n_steps);
  const std::size_t len = out.original.states.size();
  out.er.resize(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double diff = (out.original.states[n] - out.averaged.states[n]).norm();
    out.er[n] = diff;
    out.sup_sq_error = std::max(out.sup_sq_error, diff * diff);
  }
  return out;
}

void write_path_csv(std::ostream& out, const GridPath& path) {
  const std::size_t d = path.states.empty() ? 0 : static_cast<std::size_t>(path.states[0].size());
  out << "t";
  for (std::size_t k = 1; k <= d; ++k) out << ",X_" << k;
  out << '\n' << std::setprecision(17);
  for (std::size_t n = 0; n < path.times.size(); ++n) {
    out << path.times[n];
    for (std::size_t k = 0; k < d; ++k) out << ',' << path.states[n][static_cast<Eigen::Index>(k)];
    out << '\n';
  }
}

void write_coupled_csv(std::ostream& out, const CoupledResult& result) {
  const auto& xs = result.original.states;
  const auto& zs = result.averaged.states;
  const std::size_t d = xs.empty() ? 0 : static_cast<std::size_t>(xs[0].size());
  out << "t";
  for (std::size_t k = 1; k <= d; ++k) out << ",X_" << k;
  for (std::size_t k = 1; k <= d; ++k) out << ",Z_" << k;
  out << ",Er\n" << std::setprecision(17);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    out << result.original.times[n];
    for (std::size_t k = 0; k < d; ++k) out << ',' << xs[n][static_cast<Eigen::Index>(k)];
    for (std::size_t k = 0; k < d; ++k) out << ',' << zs[n][static_cast<Eigen::Index>(k)];
    out << ',' << result.er[n] << '\n';
  }
}

}  // namespace fracavg
