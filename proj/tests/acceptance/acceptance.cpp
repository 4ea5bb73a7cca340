// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracavg/averaging.hpp"
#include "fracavg/cli.hpp"
#include "fracavg/config.hpp"
#include "fracavg/frackernel.hpp"
#include "fracavg/harness.hpp"
#include "fracavg/levy.hpp"
#include "fracavg/problems.hpp"
#include "fracavg/solver.hpp"
#include "json.hpp"

using namespace fracavg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome kernel_telescoping() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> beta(0.501, 0.999), logh(-4.0, 0.0);
  std::uniform_int_distribution<std::size_t> n(1, 5000);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double b = beta(rng), h = std::pow(10.0, logh(rng));
    const std::size_t m = n(rng);
    const auto w = build_kernel_weights(FractionalOrder(b), h, m);
    double sum = 0.0;
    for (double v : w.weights) sum += v;
    worst = std::max(worst, rel(sum, std::pow(m * h, b) / b));
  }
  return {worst <= 1e-12, fmt("max relative error %.3g over 50 triples", worst)};
}

double ml_terminal(double h) {
  const auto n = static_cast<std::size_t>(std::llround(1.0 / h));
  CoefficientSet c;
  c.drift = [](double, const Vector& x) -> Vector { return x; };
  c.diffusion = [](double, const Vector&) { return Matrix::Zero(1, 1); };
  const auto p = solve_original(c, NoiseRealization::zero(TimeGrid{h, n}, 1), Vector::Ones(1), 1.0,
                                FractionalOrder(0.75));
  return p.states.back()[0];
}

Outcome mittag_leffler_benchmark() {
  const double exact = mittag_leffler(0.75, 1.0);
  const double err_fine = rel(ml_terminal(1e-3), exact);
  const double e1 = rel(ml_terminal(1e-2), exact), e2 = rel(ml_terminal(5e-3), exact),
               e3 = rel(ml_terminal(2.5e-3), exact);
  const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  return {err_fine < 0.01 && order >= 0.9,
          fmt("relative error %.3g at h=1e-3; observed order %.3f (%.3f, %.3f)", err_fine, order,
              std::log2(e1 / e2), std::log2(e2 / e3))};
}

Outcome classical_limit() {
  const double h = 1e-3;
  const std::size_t n = 1000;
  CoefficientSet c;
  c.drift = [](double t, const Vector& x) -> Vector { return -x + Vector::Constant(1, std::cos(t)); };
  c.diffusion = [](double, const Vector&) { return Matrix::Zero(1, 1); };
  const auto p = solve_original(c, NoiseRealization::zero(TimeGrid{h, n}, 1), Vector::Ones(1), 1.0,
                                FractionalOrder(0.999));
  double x = 1.0, sup = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    x += h * (-x + std::cos(j * h));
    sup = std::max(sup, std::abs(x - p.states[j + 1][0]));
  }
  return {sup < 1e-2, fmt("sup-norm difference %.3g", sup)};
}

Outcome nu_integral_and_gamma1() {
  const JumpMeasureSpec spec{3.0, 0.3, 0.5, 5e-4};
  const double closed = 2.0 * 3.0 * std::pow(0.5, 3.7) / 3.7;
  const double num = nu_integral(spec, [](double x) { return 2 * x * x * x * x; }, false);
  ExperimentConfig cfg;
  apply_fig_case(cfg, "a");
  const Problem p = make_problem(cfg);
  const double coef = build_averaged(p.original, cfg.average_horizon, cfg.epsilon).drift(Vector::Ones(1))[0];
  const double target = 1.0 + 1.9729157811292570515;
  const double e1 = rel(num, closed), e2 = rel(coef, target);
  return {e1 < 1e-9 && e2 < 1e-6,
          fmt("nu-integral %.12f (rel %.2g); averaged coefficient %.10f vs %.10f (rel %.2g)", num, e1, coef,
              target, e2)};
}

Outcome coupling_null() {
  ExperimentConfig cfg;
  apply_fig_case(cfg, "a");
  const Problem p = make_problem(cfg);
  AveragedCoefficientSet same;
  same.drift = [](const Vector& x) -> Vector { return 2.0 * x; };
  same.diffusion = [](const Vector&) { return Matrix::Ones(1, 1); };
  same.jump = [](const Vector& x, double m) -> Vector { return m * m * x; };
  same.jump_measure = p.original.jump_measure;
  const CoefficientSet original = same.as_time_dependent();
  const TimeGrid grid = TimeGrid::from_horizon(10.0, 1e-2);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto noise = sample_noise(*same.jump_measure, grid, 1, derive_stream_seed(17, s));
    const auto r = solve_coupled(original, same, noise, Vector::Constant(1, 0.1), 1e-3, FractionalOrder(0.6));
    worst = std::max(worst, r.sup_sq_error);
  }
  return {worst == 0.0, fmt("largest sup-square error over 100 seeds %.3g", worst)};
}

Outcome averaging_trend() {
  ExperimentConfig cfg;
  cfg.problem = "eq10";
  cfg.horizon = 10.0;
  cfg.step = 1e-2;
  cfg.n_paths = 200;
  const auto start = std::chrono::steady_clock::now();
  const auto s = convergence_study(cfg, {1e-2, 1e-3, 1e-4});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double slope = s.slope.value_or(0.0);
  return {s.strictly_decreasing && slope >= 0.8,
          fmt("means %.3g, %.3g, %.3g; slope %.3f +/- %.3f; %.1f s", s.entries[0].mean_sup_sq,
              s.entries[1].mean_sup_sq, s.entries[2].mean_sup_sq, slope, s.slope_ci95_half_width.value_or(0.0),
              secs)};
}

Outcome bound_calculator() {
  const double eps[] = {1e-2, 1e-3, 1e-4};
  BoundInputs zero;
  zero.c1 = 1.0;
  zero.z_moment = 2.0;
  bool zero_ok = true;
  for (const auto& p : theorem_bound(zero, eps).points) zero_ok = zero_ok && p.bound == 0.0;

  BoundInputs in = zero;
  in.alpha_sups = {0.1, 0.1, 0.1};
  const double value = theorem_bound_value(in, 1e-3);
  const double err = rel(value, 0.020883514430112030881);
  const auto rep = theorem_bound(in, eps);
  const bool monotone = rep.points[0].bound > rep.points[1].bound && rep.points[1].bound > rep.points[2].bound;
  return {zero_ok && err < 1e-10 && monotone,
          fmt("zero-alpha bound %s; oracle tuple %.15g (rel %.2g); monotone %s", zero_ok ? "0" : "nonzero", value,
              err, monotone ? "yes" : "no")};
}

Outcome fig1(const fs::path& fixture_path) {
  const auto fixture = nlohmann::json::parse(slurp(fixture_path));
  const fs::path out = fs::temp_directory_path() / "fracavg_acceptance_fig1";
  fs::remove_all(out);
  const std::string out_s = out.string();
  const char* argv[] = {"fracavg", "--out", out_s.c_str(), "--paths", "200", "fig1", "--case", "all"};
  std::ostringstream sink, err;
  const int code = run_cli(8, argv, sink, err);
  if (code != 0) return {false, "CLI exit " + std::to_string(code) + ": " + err.str()};

  bool ok = true;
  std::string detail;
  for (const std::string c : {"a", "b", "c", "d"}) {
    const fs::path dir = out / ("fig1_" + c);
    const bool files = fs::exists(dir / "paths" / "path_0000.csv") && fs::exists(dir / "manifest.json");
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    const auto& params = manifest["problem"];
    const bool echo = params["epsilon"] == 1e-3 && params["cutoff_c"] == 0.5 && params["x0"] == 0.1;
    const double er = nlohmann::json::parse(slurp(dir / "report.json"))["mean_sup_er"].get<double>();
    const double threshold = fixture["fig1"][c]["mean_sup_er_threshold"].get<double>();
    const bool pass = files && echo && er < threshold;
    ok = ok && pass;
    detail += fmt("%s: %.3g < %.3g%s; ", c.c_str(), er, threshold, pass ? "" : " FAILED");
  }
  return {ok, detail};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "fracavg_acceptance_rerun";
  fs::remove_all(root);
  const std::string first = (root / "first").string();
  const char* argv1[] = {"fracavg", "--out", first.c_str(), "--paths", "50", "--seed", "31415",
                         "simulate", "--case", "b"};
  std::ostringstream sink, err;
  if (run_cli(10, argv1, sink, err) != 0) return {false, "initial run failed: " + err.str()};

  // Rebuild the configuration from the manifest echo alone.
  const auto manifest = nlohmann::json::parse(slurp(fs::path(first) / "manifest.json"));
  ExperimentConfig cfg;
  for (const auto& [key, value] : manifest["config"].items()) {
    if (key != "case") set_field(cfg, key, value.get<std::string>());
  }
  cfg.fig_case = manifest["config"]["case"].get<std::string>();
  cfg.out_dir = (root / "second").string();
  write_run(cfg.out_dir, cfg, run_ensemble(cfg), nlohmann::json::object());

  const std::string third = (root / "third").string();
  const std::string cfg_path = (fs::path(first) / "config.cfg").string();
  const char* argv3[] = {"fracavg", "--config", cfg_path.c_str(), "--out", third.c_str(), "simulate"};
  if (run_cli(6, argv3, sink, err) != 0) return {false, "config rerun failed: " + err.str()};

  const std::string a = slurp(fs::path(first) / "report.json");
  const bool same = a == slurp(root / "second" / "report.json") && a == slurp(fs::path(third) / "report.json");
  return {same, fmt("report.json %zu bytes, reruns from manifest and config.cfg %s", a.size(),
                    same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path fixture = argc > 1 ? fs::path(argv[1]) : fs::path("tests/fixtures/fig1_oracle.json");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kernel weights telescope", kernel_telescoping},
      {"mittag-leffler benchmark", mittag_leffler_benchmark},
      {"beta -> 1 classical limit", classical_limit},
      {"nu-integral closed form and averaged drift", nu_integral_and_gamma1},
      {"coupling null test", coupling_null},
      {"averaging-principle trend", averaging_trend},
      {"error bound calculator", bound_calculator},
      {"figure cases a-d from the CLI", [&] { return fig1(fixture); }},
      {"determinism of reruns", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " -- " << o.detail
              << " (" << fmt("%.2f", secs) << " s)" << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size()
            << std::endl;
  return failed ? 1 : 0;
}
