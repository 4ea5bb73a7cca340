#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracavg {

/// Order of the Caputo derivative. Only the open interval (1/2, 1) is valid.
class FractionalOrder {
 public:
  explicit FractionalOrder(double beta);

  double value() const noexcept { return beta_; }

 private:
  double beta_;
};

/// Thrown when a series needs more terms than its configured cap.
class SeriesDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gamma function for x > 0. Throws std::domain_error otherwise.
double gamma_fn(double x);

inline constexpr std::size_t kMittagLefflerMaxTerms = 10000;

/// One-parameter Mittag-Leffler function E_beta(z) = sum_k z^k / Gamma(k beta + 1)
/// for beta in (0, 1] and z >= 0.
///
/// The series is summed directly and truncated once the terms are past their
/// peak and the running term drops below tol times the partial sum.
double mittag_leffler(double beta, double z, double tol = 1e-16,
                      std::size_t max_terms = kMittagLefflerMaxTerms);

struct SeriesSum {
  double value = 0.0;
  std::size_t terms = 0;
};

/// mittag_leffler together with the number of terms summed.
SeriesSum mittag_leffler_series(double beta, double z, double tol = 1e-16,
                                std::size_t max_terms = kMittagLefflerMaxTerms);

/// Product-integration weights of the kernel (t_n - s)^(beta-1) on a uniform
/// grid t_j = j * step:
///
///   weights[j] = [(t_n - t_j)^beta - (t_n - t_{j+1})^beta] / beta,  j < n.
struct KernelWeights {
  std::size_t n = 0;
  double step = 0.0;
  std::vector<double> weights;
};

KernelWeights build_kernel_weights(FractionalOrder beta, double step, std::size_t n);

/// Lag-indexed kernel coefficients for a whole grid. Both families depend on
/// t_n - t_j only through the lag n - j, so the solver builds them once.
class KernelTable {
 public:
  KernelTable(FractionalOrder beta, double step, std::size_t max_lag);

  /// Exact integral of (t_n - s)^(beta-1) over [t_j, t_{j+1}] with lag = n - j >= 1.
  double integral_weight(std::size_t lag) const { return integral_[lag]; }

  /// Kernel value (lag * step)^(beta-1) at the left endpoint, lag >= 1.
  double point_weight(std::size_t lag) const { return point_[lag]; }

  std::size_t max_lag() const noexcept { return integral_.size() - 1; }
  double step() const noexcept { return step_; }
  double beta() const noexcept { return beta_; }

 private:
  double beta_;
  double step_;
  std::vector<double> integral_;
  std::vector<double> point_;
};

}  // namespace fracavg
