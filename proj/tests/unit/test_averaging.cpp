#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fracavg/averaging.hpp"
#include "fracavg/config.hpp"
#include "fracavg/problems.hpp"

using namespace fracavg;

namespace {

constexpr double kPi = std::numbers::pi;
Vector scalar(double v) { return Vector::Constant(1, v); }
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

JumpMeasureSpec measure() { return {3.0, 0.3, 0.5, 5e-4}; }

CoefficientSet cos2_drift() {
  CoefficientSet c;
  c.drift = [](double t, const Vector& x) -> Vector {
    const double ct = std::cos(t);
    return 2.0 * ct * ct * x;
  };
  c.diffusion = [](double, const Vector&) { return Matrix::Constant(1, 1, 1.0); };
  return c;
}

AveragedCoefficientSet identity_drift() {
  AveragedCoefficientSet a;
  a.drift = [](const Vector& x) -> Vector { return x; };
  a.diffusion = [](const Vector&) { return Matrix::Constant(1, 1, 1.0); };
  return a;
}

}  // namespace

TEST_SUITE("averaging") {
  TEST_CASE("time averages of known coefficients") {
    const auto avg = time_average(cos2_drift().drift, scalar(1.0), 100 * kPi);
    CHECK(std::abs(avg.value[0] - 1.0) < 1e-10);
    CHECK(avg.converged);

    const DriftFn constant = [](double, const Vector& x) -> Vector { return 3.5 * x; };
    CHECK(time_average(constant, scalar(2.0), 17.0).value[0] == doctest::Approx(7.0).epsilon(1e-15));

    const DriftFn sine = [](double t, const Vector&) { return scalar(std::sin(t)); };
    CHECK(std::abs(time_average(sine, scalar(0.0), 2 * kPi * 7).value[0]) < 1e-10);
    CHECK_THROWS_AS(time_average(sine, scalar(0.0), 0.0), std::invalid_argument);
  }

  TEST_CASE("time average is linear") {
    const DriftFn f = [](double t, const Vector& x) -> Vector { return std::exp(-t) * x; };
    const DriftFn g = [](double t, const Vector&) { return scalar(t * t); };
    const DriftFn combo = [&](double t, const Vector& x) -> Vector { return 2.0 * f(t, x) - 0.5 * g(t, x); };
    const Vector x = scalar(1.7);
    const double lhs = time_average(combo, x, 9.0).value[0];
    const double rhs = 2.0 * time_average(f, x, 9.0).value[0] - 0.5 * time_average(g, x, 9.0).value[0];
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(rhs));
  }

  TEST_CASE("non-convergent time averages are reported, not fatal") {
    const DriftFn growing = [](double t, const Vector&) { return scalar(t); };
    const auto avg = time_average(growing, scalar(0.0), 10.0);
    CHECK_FALSE(avg.converged);
    CHECK(avg.value[0] == doctest::Approx(5.0));
  }

  TEST_CASE("averaged jump drift") {
    const JumpCoefficientFn h = [](double t, const Vector& x, double m) -> Vector {
      const double st = std::sin(t), m2 = m * m;
      return 2.0 * m2 * m2 * st * st * x;
    };
    const double expected = 3.0 * std::pow(0.5, 3.7) / 3.7;
    CHECK(rel(averaged_jump_drift(measure(), h, scalar(1.0), 100 * kPi)[0], expected) < 1e-9);
    CHECK(rel(expected / std::sqrt(1e-3), 1.9729157811292570515) < 1e-12);
    CHECK(rel(stable_jump_gamma1(3.0, 0.3, 0.5, 1e-3), 1.9729157811292570515) < 1e-12);

    const JumpCoefficientFn zero = [](double, const Vector&, double) { return scalar(0.0); };
    CHECK(averaged_jump_drift(measure(), zero, scalar(1.0), 10.0)[0] == 0.0);

    const JumpCoefficientFn frozen = [](double, const Vector& x, double m) -> Vector { return m * m * x; };
    const double direct = nu_integral(measure(), [](double m) { return 3.0 * m * m; }, false);
    CHECK(rel(averaged_jump_drift(measure(), frozen, scalar(3.0), 5.0)[0], direct) < 1e-10);
  }

  TEST_CASE("averaged eq10 drift matches 1 + gamma1 on a probe grid") {
    ExperimentConfig cfg;
    apply_fig_case(cfg, "a");
    const Problem p = make_problem(cfg);
    REQUIRE(p.gamma1.has_value());
    const auto folded = build_averaged(p.original, 100 * kPi, cfg.epsilon);
    CHECK_FALSE(static_cast<bool>(folded.jump));
    for (double z : {-10.0, -0.3, 0.1, 1.0, 25.0}) {
      const Vector zv = scalar(z);
      CHECK(std::abs(folded.drift(zv)[0] - p.averaged.drift(zv)[0]) < 1e-8 * std::max(1.0, std::abs(z)));
    }
    CHECK(rel(folded.drift(scalar(1.0))[0], 2.9729157811292570515) < 1e-6);
  }

  TEST_CASE("folding the jump drift needs deterministic mode") {
    CoefficientSet c = cos2_drift();
    c.jump = [](double, const Vector& x, double m) -> Vector { return m * x; };
    c.jump_measure = measure();
    CHECK_THROWS_AS(build_averaged(c, 10.0, 1e-3), std::invalid_argument);
    const auto plain = build_averaged(c, 100 * kPi);
    CHECK(static_cast<bool>(plain.jump));
    CHECK(plain.drift(scalar(2.0))[0] == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("residuals vanish when the coefficient is already averaged") {
    AveragedCoefficientSet a = identity_drift();
    const auto r = h3_residuals(a.as_time_dependent(), a, {10, 100, 1000}, default_probe_states(1));
    for (double v : r.alpha1.values) CHECK(v == 0.0);
    for (double v : r.alpha2.values) CHECK(v == 0.0);
    CHECK(r.alpha1.status == DecayStatus::identically_zero);
  }

  TEST_CASE("time-averaged drift residual decays like 1/T1 while the pointwise one does not") {
    const auto r = h3_residuals(cos2_drift(), identity_drift(), {10, 100, 1000}, default_probe_states(1));
    REQUIRE(r.alpha1.values.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const double t1 = r.t1_grid[i];
      CHECK(r.alpha1.values[i] >= 0.0);
      // |(1/T) int cos 2s ds| <= 1/(2T), times |x| / (1 + |x|) < 1
      CHECK(r.alpha1.values[i] <= 1.0 / (2.0 * t1) + 1e-12);
    }
    CHECK(r.alpha1.status == DecayStatus::decays);
    CHECK(r.pointwise_alpha1.status == DecayStatus::no_decay);
  }

  TEST_CASE("diffusion residual of (1 + sin t) I is at most 2/T1") {
    CoefficientSet c;
    c.drift = [](double, const Vector& x) -> Vector { return x; };
    c.diffusion = [](double t, const Vector&) {
      return Matrix::Constant(1, 1, std::sqrt(1.0 + std::sin(t)));
    };
    AveragedCoefficientSet a = identity_drift();
    const auto r = h3_residuals(c, a, {10, 100, 1000}, default_probe_states(1));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(r.alpha2.values[i] <= 2.0 / r.t1_grid[i]);
      CHECK(r.alpha2.values[i] > 0.0);
    }
  }

  TEST_CASE("a single T1 point is insufficient data") {
    const auto r = h3_residuals(cos2_drift(), identity_drift(), {100}, default_probe_states(1));
    CHECK(r.alpha1.status == DecayStatus::insufficient_data);
    CHECK_THROWS_AS(h3_residuals(cos2_drift(), identity_drift(), {100}, {}), std::invalid_argument);
  }

  TEST_CASE("hypothesis constants for the eq10 coefficients") {
    ExperimentConfig cfg;
    apply_fig_case(cfg, "a");
    const Problem p = make_problem(cfg);
    const auto rep = check_hypotheses(p.original, p.averaged_components, {10, 100, 1000},
                                      default_probe_states(1), default_probe_times(10.0, 8));
    REQUIRE(rep.lipschitz_estimate.has_value());
    CHECK(*rep.lipschitz_estimate >= 3.9);
    CHECK(*rep.lipschitz_estimate <= 4.0 + 1e-9);
    CHECK(rep.alpha3.status == DecayStatus::decays);
    CHECK(rep.alpha2.status == DecayStatus::identically_zero);
    const nlohmann::json j = rep;
    CHECK(j["alpha1"]["status"] == "decays");
  }

  TEST_CASE("bound with zero alphas is zero") {
    BoundInputs in;
    in.c1 = 2.0;
    const double eps[] = {1e-2, 1e-3, 1e-4};
    const auto rep = theorem_bound(in, eps);
    CHECK(rep.k12 == 0.0);
    CHECK(rep.k22 == 0.0);
    CHECK(rep.k32 == 0.0);
    for (const auto& p : rep.points) CHECK(p.bound == 0.0);
  }

  TEST_CASE("bound oracle tuple and monotonicity") {
    BoundInputs in;
    in.c1 = 1.0;
    in.alpha_sups = {0.1, 0.1, 0.1};
    in.z_moment = 2.0;
    in.beta = 0.75;
    // mpmath partial sum, 100 terms
    CHECK(rel(theorem_bound_value(in, 1e-3), 0.020883514430112030881) < 1e-10);

    const double eps[] = {1e-2, 1e-3, 1e-4};
    const auto rep = theorem_bound(in, eps);
    CHECK(rep.points[0].bound > rep.points[1].bound);
    CHECK(rep.points[1].bound > rep.points[2].bound);
    CHECK(rep.k11 >= 0.0);

    BoundInputs more = in;
    more.z_moment = 3.0;
    CHECK(theorem_bound_value(more, 1e-3) > theorem_bound_value(in, 1e-3));
    more = in;
    more.c1 = 1.5;
    CHECK(theorem_bound_value(more, 1e-3) > theorem_bound_value(in, 1e-3));
    more = in;
    more.alpha_sups[2] = 0.2;
    CHECK(theorem_bound_value(more, 1e-3) > theorem_bound_value(in, 1e-3));
  }

  TEST_CASE("bound input validation and divergence") {
    BoundInputs in;
    in.lambda = 1.0;
    CHECK_THROWS_AS(in.validate(), std::invalid_argument);
    in.lambda = 0.5;
    in.z_moment = 0.5;
    CHECK_THROWS_AS(in.validate(), std::invalid_argument);
    in.z_moment = 1.0;
    CHECK_THROWS_AS(theorem_bound_value(in, 0.0), std::invalid_argument);
    in.c1 = 1e6;
    in.alpha_sups = {1, 1, 1};
    CHECK_THROWS_AS(theorem_bound_value(in, 1.0), SeriesDivergenceError);
  }
}
