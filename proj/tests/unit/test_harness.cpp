#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fracavg/harness.hpp"
#include "fracavg/problems.hpp"

using namespace fracavg;
namespace fs = std::filesystem;

namespace {

ExperimentConfig identical_custom() {
  ExperimentConfig c;
  c.problem = "custom";
  c.f = "0.5 * x";
  c.fbar = "0.5 * x";
  c.g = "1";
  c.gbar = "1";
  c.horizon = 2.0;
  c.step = 0.02;
  c.n_paths = 20;
  c.compute_bound = false;
  return c;
}

ExperimentConfig small_eq10(double eps = 1e-3) {
  ExperimentConfig c;
  apply_fig_case(c, "a");
  c.epsilon = eps;
  c.horizon = 2.0;
  c.step = 0.02;
  c.n_paths = 40;
  c.compute_bound = false;
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracavg_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("identical coefficient sets give exactly zero error") {
    const auto r = run_ensemble(identical_custom());
    CHECK(r.report.mean_sup_sq == 0.0);
    CHECK(r.report.ci95_half_width == 0.0);
    for (double v : r.report.per_path_sup_sq) CHECK(v == 0.0);
  }

  TEST_CASE("reports are deterministic and independent of worker count") {
    auto c = small_eq10();
    c.n_paths = 1;
    const nlohmann::json a = run_ensemble(c).report, b = run_ensemble(c).report;
    CHECK(a.dump() == b.dump());

    c.n_paths = 12;
    c.workers = 1;
    const nlohmann::json one = run_ensemble(c).report;
    c.workers = 3;
    const nlohmann::json three = run_ensemble(c).report;
    CHECK(one.dump() == three.dump());
  }

  TEST_CASE("report statistics") {
    const auto r = run_ensemble(small_eq10()).report;
    CHECK(r.n_paths == 40);
    CHECK(r.failures.empty());
    CHECK(r.mean_sup_sq > 0.0);
    CHECK(r.ci95_half_width > 0.0);
    CHECK(r.er_mean_curve.size() == 101);
    CHECK(r.er_mean_curve.front() == 0.0);
    CHECK(r.z_moment >= 1.0);
    double mean = 0.0;
    for (double v : r.per_path_sup_sq) mean += v;
    CHECK(r.mean_sup_sq == doctest::Approx(mean / 40).epsilon(1e-14));
  }

  TEST_CASE("confidence half-width shrinks like one over root n") {
    auto c = small_eq10();
    c.n_paths = 100;
    const double w100 = run_ensemble(c).report.ci95_half_width;
    c.n_paths = 400;
    const double w400 = run_ensemble(c).report.ci95_half_width;
    CHECK(w100 / w400 == doctest::Approx(2.0).epsilon(0.25));
  }

  TEST_CASE("bound is attached when requested") {
    auto c = small_eq10();
    c.compute_bound = true;
    const auto r = run_ensemble(c).report;
    REQUIRE(r.hypotheses.has_value());
    if (r.bound) {
      CHECK(r.bound->points.front().bound >= 0.0);
    } else {
      CHECK_FALSE(r.bound_note.empty());
    }
  }

  TEST_CASE("too many failing paths fail the run") {
    auto c = identical_custom();
    c.f = "x^2 * 1e200";
    c.epsilon = 1.0;
    CHECK_THROWS_AS(run_ensemble(c), EnsembleError);
  }

  TEST_CASE("convergence study preconditions") {
    auto c = small_eq10();
    CHECK_THROWS_AS(convergence_study(c, {1e-2, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_study(c, {1e-2, 5e-3, 2e-3}), std::invalid_argument);
  }

  TEST_CASE("degenerate study is reported, not thrown") {
    auto c = identical_custom();
    c.g = "0";
    c.gbar = "0";
    const auto s = convergence_study(c, {1e-2, 1e-3, 1e-4});
    CHECK(s.status == "degenerate");
    CHECK_FALSE(s.slope.has_value());
    for (const auto& e : s.entries) CHECK(e.mean_sup_sq == 0.0);
  }

  TEST_CASE("study is independent of epsilon order") {
    auto c = small_eq10();
    c.n_paths = 30;
    const nlohmann::json a = convergence_study(c, {1e-2, 1e-3, 1e-4});
    const nlohmann::json b = convergence_study(c, {1e-4, 1e-2, 1e-3});
    CHECK(a.dump() == b.dump());
    CHECK(a["status"] == "ok");
    CHECK(a["entries"][0]["epsilon"] == 1e-2);
  }

  TEST_CASE("unresolved study refuses the fit") {
    auto c = small_eq10();
    c.n_paths = 2;
    CHECK_THROWS_AS(convergence_study(c, {1.0, 0.9, 0.8, 0.01}), InsufficientResolutionError);
  }

  TEST_CASE("figure case output layout") {
    auto base = small_eq10();
    base.out_dir = temp_dir("fig1").string();
    base.n_paths = 4;
    const auto out = reproduce_fig1("d", base);
    CHECK(out.directory == fs::path(base.out_dir) / "fig1_d");
    CHECK(fs::exists(out.directory / "paths" / "path_0000.csv"));
    const auto manifest = nlohmann::json::parse(slurp(out.directory / "manifest.json"));
    CHECK(manifest["problem"]["beta"] == 0.85);
    CHECK(manifest["problem"]["alpha"] == 1.9);
    CHECK(manifest["problem"]["gamma"] == 3.0);
    CHECK(manifest["master_seed"] == base.master_seed);

    std::ifstream csv(out.directory / "paths" / "path_0000.csv");
    std::string header, first;
    std::getline(csv, header);
    std::getline(csv, first);
    CHECK(header == "t,X_1,Z_1,Er");
    CHECK(first.substr(first.rfind(',') + 1) == "0");
    CHECK_THROWS_AS(reproduce_fig1("z", base), ConfigError);
  }

  TEST_CASE("rerunning the saved config reproduces report.json byte for byte") {
    auto c = small_eq10();
    c.n_paths = 6;
    const fs::path first = temp_dir("rerun_a"), second = temp_dir("rerun_b");
    write_run(first, c, run_ensemble(c), nlohmann::json::object());
    ExperimentConfig again;
    apply_config_file(again, first / "config.cfg");
    write_run(second, again, run_ensemble(again), nlohmann::json::object());
    CHECK(slurp(first / "report.json") == slurp(second / "report.json"));
  }

  TEST_CASE("problem registry") {
    CHECK(builtin_problems().size() == 4);
    ExperimentConfig c;
    c.problem = "nope";
    CHECK_THROWS_AS(make_problem(c), ConfigError);
    c.problem = "custom";
    CHECK_THROWS_AS(make_problem(c), ConfigError);
    c.f = "x +";
    CHECK_THROWS_AS(make_problem(c), ConfigError);
  }
}
