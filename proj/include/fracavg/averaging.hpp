#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracavg/levy.hpp"
#include "fracavg/solver.hpp"
#include "json.hpp"

namespace fracavg {

inline constexpr double kTimeAverageTolerance = 1e-10;

struct TimeAverage {
  /// (1/T) int_0^T coefficient(t, state) dt.
  Vector value;
  /// Same average over [0, 2T].
  Vector value_double_horizon;
  /// |value - value_double_horizon|_inf.
  double diagnostic = 0.0;
  bool converged = false;
};

/// Time average of a coefficient at a fixed state. Non-convergence of the
/// T -> 2T diagnostic is reported in the result, never thrown.
TimeAverage time_average(const DriftFn& coefficient, const Vector& state, double horizon,
                         double tol = kTimeAverageTolerance);

/// (1/T) int_0^T int_0^c H(t, state, x) nu(dx) dt.
Vector averaged_jump_drift(const JumpMeasureSpec& spec, const JumpCoefficientFn& jump,
                           const Vector& state, double horizon);

/// Averaged coefficients evaluated lazily by quadrature over [0, horizon].
///
/// With fold_epsilon set and a deterministic nu-drift jump part, the averaged
/// jump drift is folded into the drift as avg(f) + avg(int H nu) / sqrt(eps)
/// and the averaged set carries no jump coefficient. Otherwise H is averaged
/// pointwise in the mark.
AveragedCoefficientSet build_averaged(const CoefficientSet& coeffs, double horizon,
                                      std::optional<double> fold_epsilon = std::nullopt);

enum class DecayStatus { decays, no_decay, identically_zero, insufficient_data };
const char* to_string(DecayStatus status);

struct ResidualEnvelope {
  std::vector<double> values;
  DecayStatus status = DecayStatus::insufficient_data;
};

/// Numerical evidence for the Lipschitz, growth and averaging hypotheses.
/// All suprema run over the recorded probe sets, so they are lower bounds of
/// the true constants.
struct HypothesisReport {
  std::vector<Vector> probe_states;
  std::vector<double> probe_times;
  std::vector<double> t1_grid;

  std::optional<double> lipschitz_estimate;
  std::optional<double> growth_estimate;

  /// Time-averaged residuals sup_x |(1/T1) int_0^T1 (f(s,x) - fbar(x)) ds| / (1 + |x|)
  /// and the analogues for a = G G' and the nu-integral of H.
  ResidualEnvelope alpha1;
  ResidualEnvelope alpha2;
  ResidualEnvelope alpha3;
  /// sup_x |f(T1, x) - fbar(x)| / (1 + |x|), the residual without time averaging.
  ResidualEnvelope pointwise_alpha1;

  std::array<double, 3> alpha_sups() const;
};

/// Log-spaced magnitudes {1e-2, 1e-1, 1, 1e1, 1e2} with both signs along each axis.
std::vector<Vector> default_probe_states(std::size_t dim);

/// `count` evenly spaced times on [0, horizon].
std::vector<double> default_probe_times(double horizon, std::size_t count = 16);

/// Fills the alpha envelopes and the time-averaging fields of the report.
HypothesisReport h3_residuals(const CoefficientSet& coeffs, const AveragedCoefficientSet& averaged,
                              const std::vector<double>& t1_grid,
                              const std::vector<Vector>& probe_states);

/// h3_residuals plus the Lipschitz (C1) and linear-growth (C2) estimates.
HypothesisReport check_hypotheses(const CoefficientSet& coeffs,
                                  const AveragedCoefficientSet& averaged,
                                  const std::vector<double>& t1_grid,
                                  const std::vector<Vector>& probe_states,
                                  const std::vector<double>& probe_times);

struct BoundInputs {
  double c1 = 0.0;
  std::array<double, 3> alpha_sups{0.0, 0.0, 0.0};
  /// Estimate of 1 + E sup |Z_eps|^2.
  double z_moment = 1.0;
  double beta = 0.75;
  double lambda = 0.5;
  double L = 1.0;

  void validate() const;
};

struct BoundPoint {
  double epsilon = 0.0;
  double prefactor = 0.0;
  double series_argument = 0.0;
  double series = 0.0;
  std::size_t series_terms = 0;
  /// The constant C with bound = C eps^(1 - lambda).
  double constant = 0.0;
  double bound = 0.0;
};

struct BoundReport {
  BoundInputs inputs;
  double k11 = 0.0, k12 = 0.0, k21 = 0.0, k22 = 0.0, k31 = 0.0, k32 = 0.0;
  std::vector<BoundPoint> points;
};

/// Mean-square sup error bound C eps^(1 - lambda) on [0, L eps^-lambda]
/// for each epsilon in the grid.
BoundReport theorem_bound(const BoundInputs& inputs, std::span<const double> epsilons);

/// Single-epsilon convenience wrapper.
double theorem_bound_value(const BoundInputs& inputs, double epsilon);

void to_json(nlohmann::json& j, const HypothesisReport& report);
void to_json(nlohmann::json& j, const BoundReport& report);

}  // namespace fracavg
