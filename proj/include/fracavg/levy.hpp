#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace fracavg {

/// One-sided truncated alpha-stable jump measure nu(dx) = gamma x^(-1-alpha) dx
/// on (0, cutoff_c). Jumps are simulated on [cutoff_delta, cutoff_c) only.
struct JumpMeasureSpec {
  double gamma = 1.0;
  double alpha = 1.0;
  double cutoff_c = 1.0;
  double cutoff_delta = 1e-3;

  /// Spec with the default inner cutoff delta = c * 1e-3.
  static JumpMeasureSpec with_default_delta(double gamma, double alpha, double cutoff_c);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// lambda_delta = (gamma / alpha) (delta^-alpha - c^-alpha), the simulated jump rate.
  double intensity() const;

  double density(double x) const;

  /// CDF of the normalised mark law on [delta, c).
  double mark_cdf(double x) const;

  /// Inverse CDF; u in [0, 1) maps into [delta, c).
  double mark_quantile(double u) const;
};

/// Uniform grid t_j = j * step, j = 0..n_steps.
struct TimeGrid {
  double step = 0.0;
  std::size_t n_steps = 0;

  static TimeGrid from_horizon(double horizon, double step);

  double horizon() const noexcept { return step * static_cast<double>(n_steps); }
  double time(std::size_t j) const noexcept { return step * static_cast<double>(j); }
};

struct JumpEvent {
  double time = 0.0;
  double mark = 0.0;
  bool operator==(const JumpEvent&) const = default;
};

/// Brownian increments and jump events on a grid, shared read-only between the
/// original and averaged solves.
struct NoiseRealization {
  TimeGrid grid;
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  std::optional<JumpMeasureSpec> jump_measure;
  /// Row-major: increments for step j occupy [j * dim, (j + 1) * dim).
  std::vector<double> brownian;
  /// Sorted by time.
  std::vector<JumpEvent> jumps;

  std::span<const double> increment(std::size_t step) const {
    return {brownian.data() + step * dim, dim};
  }

  /// Same grid with all increments zero and no jumps.
  static NoiseRealization zero(const TimeGrid& grid, std::size_t dim);
};

/// Seed of the independent stream for (master_seed, index). Streams for
/// different indices do not depend on the order in which they are created.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index);

/// Reproducible uniform, normal and exponential variates from a 64-bit seed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Exponential with rate 1.
  double exponential();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Brownian increments N(0, step) per component plus small jumps on
/// [delta, c) with Poisson arrival rate lambda_delta and inverse-CDF marks.
NoiseRealization sample_noise(const JumpMeasureSpec& spec, const TimeGrid& grid,
                              std::size_t dim, std::uint64_t seed);

/// Brownian part only; increments match sample_noise for the same seed.
NoiseRealization sample_brownian_noise(const TimeGrid& grid, std::size_t dim,
                                       std::uint64_t seed);

/// Raised when a nu-integral fails to converge at the origin.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNuIntegralTolerance = 1e-10;

/// Integral of integrand(x) * gamma x^(-1-alpha) over (0, c), or over
/// [delta, c) when use_delta is set.
double nu_integral(const JumpMeasureSpec& spec, const std::function<double(double)>& integrand,
                   bool use_delta, double rel_tol = kNuIntegralTolerance);

Eigen::VectorXd nu_integral_vector(const JumpMeasureSpec& spec,
                                   const std::function<Eigen::VectorXd(double)>& integrand,
                                   bool use_delta, double rel_tol = kNuIntegralTolerance);

using JumpCoefficientFn =
    std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& state, double mark)>;

/// dt * int_delta^c h(t, state, x) nu(dx): the part of the compensated
/// measure subtracted over one step.
Eigen::VectorXd compensator_increment(const JumpMeasureSpec& spec, const JumpCoefficientFn& h,
                                      double t, const Eigen::VectorXd& state, double dt);

/// Binary sidecar, little-endian:
///   "FRACNOIS" | u32 version | u32 flags (bit 0: jump measure present) | u64 seed
///   | f64 step | u64 n_steps | u64 dim | f64 gamma, alpha, c, delta | u64 n_jumps
///   | f64[n_steps * dim] increments | (f64 time, f64 mark)[n_jumps]
void write_noise(std::ostream& out, const NoiseRealization& noise);
NoiseRealization read_noise(std::istream& in);

}  // namespace fracavg
