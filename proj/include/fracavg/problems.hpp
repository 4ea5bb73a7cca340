#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fracavg/config.hpp"
#include "fracavg/frackernel.hpp"
#include "fracavg/solver.hpp"
#include "json.hpp"

namespace fracavg {

/// A configured original/averaged pair ready for coupled solves.
struct Problem {
  std::string name;
  CoefficientSet original;
  /// Averaged system actually solved against the original.
  AveragedCoefficientSet averaged;
  /// Component-wise averages (f -> fbar, G -> Gbar, H -> Hbar) used when
  /// checking the averaging hypotheses. Differs from `averaged` when the
  /// averaged jump drift is folded into fbar, as in the averaged eq10 system.
  AveragedCoefficientSet averaged_components;
  Vector x0;
  FractionalOrder beta{0.75};
  /// gamma_1 of the averaged eq10 drift eps (1 + gamma_1) z.
  std::optional<double> gamma1;
  nlohmann::json parameters;

  bool needs_jump_events() const;
};

/// Names accepted by make_problem: eq10, eq10-linear, mittag-leffler, custom.
const std::vector<std::string>& builtin_problems();

/// gamma c^(4 - alpha) / (sqrt(eps) (4 - alpha)).
double stable_jump_gamma1(double gamma, double alpha, double cutoff_c, double epsilon);

/// Throws ConfigError for unknown problems or malformed custom expressions.
Problem make_problem(const ExperimentConfig& config);

}  // namespace fracavg
