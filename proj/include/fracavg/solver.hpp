#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracavg/frackernel.hpp"
#include "fracavg/levy.hpp"

namespace fracavg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest admissible scale parameter epsilon_0.
inline constexpr double kEpsilonMax = 1.0;

/// How the jump coefficient H enters the equation.
///   compensated_prm:        integrated against the compensated measure N~(dt, dx)
///   deterministic_nu_drift: integrated against nu(dx) dt, a deterministic drift
enum class JumpMode { compensated_prm, deterministic_nu_drift };

const char* to_string(JumpMode mode);
JumpMode jump_mode_from_string(const std::string& name);

using DriftFn = std::function<Vector(double t, const Vector& state)>;
using DiffusionFn = std::function<Matrix(double t, const Vector& state)>;

/// f, G, H of one problem instance. H is optional; without it the equation has
/// no jump part.
struct CoefficientSet {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  JumpCoefficientFn jump;
  JumpMode jump_mode = JumpMode::compensated_prm;
  std::optional<JumpMeasureSpec> jump_measure;

  bool has_jumps() const { return static_cast<bool>(jump); }
  /// Throws std::invalid_argument if evaluators or the jump measure are missing.
  void validate() const;
};

using AveragedDriftFn = std::function<Vector(const Vector& state)>;
using AveragedDiffusionFn = std::function<Matrix(const Vector& state)>;
using AveragedJumpFn = std::function<Vector(const Vector& state, double mark)>;

/// Time-independent coefficients of the averaged equation.
struct AveragedCoefficientSet {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  AveragedDriftFn drift;
  AveragedDiffusionFn diffusion;
  AveragedJumpFn jump;
  JumpMode jump_mode = JumpMode::compensated_prm;
  std::optional<JumpMeasureSpec> jump_measure;

  /// View as a CoefficientSet whose evaluators ignore t.
  CoefficientSet as_time_dependent() const;
};

/// Grid approximation of one cadlag solution.
struct GridPath {
  std::vector<double> times;
  std::vector<Vector> states;
  double epsilon = 0.0;
};

/// A path solve hit a non-finite state.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& system, std::size_t step, const std::string& what);
  const std::string& system() const noexcept { return system_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::string system_;
  std::size_t step_;
};

/// Discretised mild solution of the epsilon-scaled equation on the noise grid:
///
///   X_n = X_0 + 1/Gamma(beta) * sum_{j<n} [ w_{n-j} D_j + (t_n - t_j)^(beta-1) S_j ]
///
/// with exact product-integration weights w, deterministic part
/// D_j = eps f(t_j, X_j) (+ sqrt(eps) dt-weighted int H nu in deterministic mode) and
/// stochastic part S_j = sqrt(eps) [G(t_j, X_j) dB_j + jumps in step j - compensator].
/// Every coefficient evaluated at step j sees (t_j, X_j), the left limit.
///
/// n_steps = 0 solves over the whole noise grid.
GridPath solve_original(const CoefficientSet& coeffs, const NoiseRealization& noise,
                        const Vector& x0, double epsilon, FractionalOrder beta,
                        std::size_t n_steps = 0);

GridPath solve_averaged(const AveragedCoefficientSet& coeffs, const NoiseRealization& noise,
                        const Vector& x0, double epsilon, FractionalOrder beta,
                        std::size_t n_steps = 0);

struct CoupledResult {
  GridPath original;
  GridPath averaged;
  /// Er(t_n) = |X_n - Z_n|.
  std::vector<double> er;
  /// max_n |X_n - Z_n|^2.
  double sup_sq_error = 0.0;
};

/// Both solves on one shared noise realization.
CoupledResult solve_coupled(const CoefficientSet& coeffs, const AveragedCoefficientSet& averaged,
                            const NoiseRealization& noise, const Vector& x0, double epsilon,
                            FractionalOrder beta, std::size_t n_steps = 0);

/// CSV with columns t, X_1..X_n.
void write_path_csv(std::ostream& out, const GridPath& path);
/// CSV with columns t, X_1..X_n, Z_1..Z_n, Er.
void write_coupled_csv(std::ostream& out, const CoupledResult& result);

}  // namespace fracavg
