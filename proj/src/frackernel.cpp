#include "fracavg/frackernel.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace fracavg {

namespace {

// lag^beta - (lag - 1)^beta without cancellation for large lags.
double power_difference(double beta, std::size_t lag) {
  if (lag == 1) return 1.0;
  const double k = static_cast<double>(lag);
  return -std::pow(k, beta) * std::expm1(beta * std::log1p(-1.0 / k));
}

}  // namespace

FractionalOrder::FractionalOrder(double beta) : beta_(beta) {
  if (!(beta > 0.5 && beta < 1.0)) {
    std::ostringstream os;
    os << "fractional order must lie in (0.5, 1), got " << beta;
    throw std::invalid_argument(os.str());
  }
}

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << "gamma_fn requires a finite positive argument, got " << x;
    throw std::domain_error(os.str());
  }
  return std::tgamma(x);
}

double mittag_leffler(double beta, double z, double tol, std::size_t max_terms) {
  return mittag_leffler_series(beta, z, tol, max_terms).value;
}

SeriesSum mittag_leffler_series(double beta, double z, double tol, std::size_t max_terms) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::domain_error("mittag_leffler: beta must lie in (0, 1]");
  }
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw std::domain_error("mittag_leffler: argument must be finite and nonnegative");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("mittag_leffler: tol must be positive");
  if (z == 0.0) return {1.0, 1};

  const double log_z = std::log(z);
  double sum = 1.0;
  double previous = 1.0;
  for (std::size_t k = 1; k < max_terms; ++k) {
    const double kd = static_cast<double>(k);
    const double arg = kd * beta + 1.0;
    double term;
    if (arg < 170.0 && kd * log_z < 700.0) {
      term = std::pow(z, kd) / std::tgamma(arg);
    } else {
      term = std::exp(kd * log_z - std::lgamma(arg));
    }
    if (!std::isfinite(term)) {
      throw SeriesDivergenceError("mittag_leffler: term overflow at k=" + std::to_string(k));
    }
    sum += term;
    // Terms are unimodal in k; only stop on the decreasing side.
    if (term <= previous && term < tol * sum) return {sum, k + 1};
    previous = term;
  }
  throw SeriesDivergenceError("mittag_leffler: no convergence within " +
                              std::to_string(max_terms) + " terms");
}

KernelWeights build_kernel_weights(FractionalOrder beta, double step, std::size_t n) {
  if (!(step > 0.0)) throw std::invalid_argument("build_kernel_weights: step must be positive");
  if (n < 1) throw std::invalid_argument("build_kernel_weights: n must be at least 1");
  const KernelTable table(beta, step, n);
  KernelWeights out;
  out.n = n;
  out.step = step;
  out.weights.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.weights[j] = table.integral_weight(n - j);
  return out;
}

KernelTable::KernelTable(FractionalOrder beta, double step, std::size_t max_lag)
    : beta_(beta.value()), step_(step), integral_(max_lag + 1, 0.0), point_(max_lag + 1, 0.0) {
  if (!(step > 0.0)) throw std::invalid_argument("KernelTable: step must be positive");
  const double scale = std::pow(step, beta_) / beta_;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    integral_[lag] = scale * power_difference(beta_, lag);
    point_[lag] = std::pow(static_cast<double>(lag) * step, beta_ - 1.0);
  }
}

}  // namespace fracavg
