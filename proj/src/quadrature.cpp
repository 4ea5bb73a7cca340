#include "quadrature.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <vector>

namespace fracavg::detail {

namespace {

// QUADPACK qk15 abscissae and weights.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  Eigen::VectorXd value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel rule15(const VectorFn& f, double a, double b, std::size_t& evaluations) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Eigen::VectorXd fc = f(centre);
  Eigen::VectorXd kronrod = kKronrod[7] * fc;
  Eigen::VectorXd gauss = kGauss[3] * fc;
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    Eigen::VectorXd pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrod[i] * pair;
    if (i % 2 == 1) gauss += kGauss[i / 2] * pair;
  }
  evaluations += 15;
  kronrod *= half;
  gauss *= half;
  const double error = (kronrod - gauss).cwiseAbs().maxCoeff();
  return Panel{a, b, std::move(kronrod), error};
}

}  // namespace

QuadratureResult gauss_kronrod(const VectorFn& f, double a, double b, double rel_tol,
                               double abs_tol, std::size_t max_intervals) {
  QuadratureResult out;
  Panel first = rule15(f, a, b, out.evaluations);
  out.value = first.value;
  out.error = first.error;

  std::priority_queue<Panel> panels;
  panels.push(std::move(first));
  auto satisfied = [&] {
    const double scale = out.value.size() ? out.value.cwiseAbs().maxCoeff() : 0.0;
    return out.error <= std::max(abs_tol, rel_tol * scale);
  };

  while (!satisfied() && panels.size() < max_intervals) {
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      panels.push(std::move(worst));
      break;
    }
    Panel left = rule15(f, worst.a, mid, out.evaluations);
    Panel right = rule15(f, mid, worst.b, out.evaluations);
    out.value += left.value + right.value - worst.value;
    out.error += left.error + right.error - worst.error;
    panels.push(std::move(left));
    panels.push(std::move(right));
  }
  // Re-sum to shed the drift of the incremental updates.
  out.value.setZero();
  out.error = 0.0;
  while (!panels.empty()) {
    out.value += panels.top().value;
    out.error += panels.top().error;
    panels.pop();
  }
  out.converged = satisfied();
  return out;
}

}  // namespace fracavg::detail
