#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace fracavg::detail {

using VectorFn = std::function<Eigen::VectorXd(double)>;

struct QuadratureResult {
  Eigen::VectorXd value;
  double error = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

// Globally adaptive 7/15-point Gauss-Kronrod on [a, b] for vector-valued
// integrands. Stops when the summed error estimate (inf-norm) falls below
// max(abs_tol, rel_tol * |value|_inf) or the interval budget is spent.
QuadratureResult gauss_kronrod(const VectorFn& f, double a, double b, double rel_tol,
                               double abs_tol, std::size_t max_intervals = 2000);

}  // namespace fracavg::detail
