#include "fracavg/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iomanip>
#include <optional>
#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracavg/averaging.hpp"
#include "fracavg/config.hpp"
#include "fracavg/harness.hpp"
#include "fracavg/problems.hpp"

namespace fracavg {

namespace {

constexpr const char* kWorkersEnv = "FRACAVG_WORKERS";

struct FlagKey {
  const char* flag;
  const char* key;
  const char* help;
};

// Order matters: "case" must precede the fields it fills in.
constexpr FlagKey kProblemFlags[] = {
    {"--problem", "problem", "eq10 | eq10-linear | mittag-leffler | custom"},
    {"--case", "case", "figure case a|b|c|d (sets beta, alpha, gamma, epsilon, c, X0)"},
    {"--beta", "beta", "fractional order in (0.5, 1)"},
    {"--alpha", "alpha", "stability index of the jump measure, (0, 2)"},
    {"--gamma", "gamma", "intensity scale of the jump measure"},
    {"--cutoff", "cutoff_c", "outer jump cutoff c"},
    {"--delta", "cutoff_delta", "inner simulation cutoff (0: c * 1e-3)"},
    {"--epsilon", "epsilon", "scale parameter in (0, 1]"},
    {"--x0", "x0", "initial state"},
    {"--rate", "rate", "rate of the mittag-leffler benchmark"},
    {"--drift", "f", "custom drift f(t, x)"},
    {"--diffusion", "g", "custom diffusion g(t, x)"},
    {"--jump", "h", "custom jump coefficient h(t, x, m)"},
    {"--drift-bar", "fbar", "custom averaged drift fbar(x) or auto"},
    {"--diffusion-bar", "gbar", "custom averaged diffusion gbar(x) or auto"},
    {"--jump-bar", "hbar", "custom averaged jump coefficient hbar(x, m) or auto"},
    {"--jump-mode", "jump_mode", "compensated_prm | deterministic_nu_drift"},
    {"--bound-lambda", "bound_lambda", "lambda of the error bound, (0, 1)"},
    {"--bound-L", "bound_L", "L of the error bound"},
    {"--write-paths", "write_paths", "number of coupled path CSVs to write"},
    {"--compute-bound", "compute_bound", "evaluate the theoretical bound (true|false)"},
    {"--average-horizon", "average_horizon", "horizon of numerical time averages"},
};

constexpr FlagKey kGlobalFlags[] = {
    {"--seed", "master_seed", "master seed"},
    {"--out", "out_dir", "output directory"},
    {"--workers", "workers", "worker threads (default from FRACAVG_WORKERS)"},
    {"--step", "step", "time step"},
    {"--horizon", "horizon", "time horizon T"},
    {"--paths", "n_paths", "number of Monte Carlo paths"},
};

struct Bound {
  const FlagKey* spec;
  CLI::Option* option;
  std::string value;
};

class FlagSet {
 public:
  void add(CLI::App& app, const FlagKey& spec) {
    auto& b = bound_.emplace_back(Bound{&spec, nullptr, {}});
    b.option = app.add_option(spec.flag, b.value, spec.help);
  }
  template <std::size_t N>
  void add_all(CLI::App& app, const FlagKey (&specs)[N]) {
    for (const auto& s : specs) add(app, s);
  }
  void apply(ExperimentConfig& config) const {
    for (const auto& b : bound_) {
      if (b.option->count() > 0) set_field(config, b.spec->key, b.value);
    }
  }

  std::optional<std::string> get(const std::string& key) const {
    for (const auto& b : bound_) {
      if (b.spec->key == key && b.option->count() > 0) return b.value;
    }
    return std::nullopt;
  }

 private:
  std::deque<Bound> bound_;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Context {
  std::string config_path;
  FlagSet global;
  std::ostream& out;
  std::ostream& err;
};

ExperimentConfig resolve(const Context& ctx, const FlagSet& local,
                         const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  ExperimentConfig cfg;
  if (const char* env = std::getenv(kWorkersEnv); env && *env) set_field(cfg, "workers", env);
  if (!ctx.config_path.empty()) apply_config_file(cfg, ctx.config_path);
  ctx.global.apply(cfg);
  local.apply(cfg);
  for (const auto& [k, v] : extra) set_field(cfg, k, v);
  validate(cfg);
  return cfg;
}

void print_report(std::ostream& out, const ErrorReport& r) {
  out << std::setprecision(6);
  out << "problem            " << r.problem << "\n";
  out << "epsilon            " << r.epsilon << "\n";
  out << "paths              " << r.n_succeeded() << " ok, " << r.failures.size() << " failed\n";
  out << "mean sup|X-Z|^2    " << r.mean_sup_sq << " +/- " << r.ci95_half_width << " (95%)\n";
  out << "mean sup Er        " << r.mean_sup_er << "\n";
  if (r.bound) out << "theoretical bound  " << r.bound->points.front().bound << "\n";
  if (!r.bound_note.empty()) out << "bound unavailable  " << r.bound_note << "\n";
}

int cmd_simulate(Context& ctx, const FlagSet& local, bool save_noise) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = resolve(ctx, local);
  const EnsembleResult result = run_ensemble(cfg);
  const std::filesystem::path dir(cfg.out_dir);

  nlohmann::json extra = {{"command", "simulate"},
                          {"workers", cfg.workers},
                          {"timing_seconds", seconds_since(start)}};
  write_run(dir, cfg, result, extra);

  if (save_noise) {
    const Problem problem = make_problem(cfg);
    const TimeGrid grid = TimeGrid::from_horizon(cfg.horizon, cfg.step);
    const JumpMeasureSpec spec{cfg.gamma, cfg.alpha, cfg.cutoff_c, cfg.effective_delta()};
    for (const auto& [index, path] : result.sample_paths) {
      const auto seed = derive_stream_seed(cfg.master_seed, index);
      const NoiseRealization noise =
          problem.needs_jump_events() ? sample_noise(spec, grid, problem.original.noise_dim, seed)
                                      : sample_brownian_noise(grid, problem.original.noise_dim, seed);
      char name[64];
      std::snprintf(name, sizeof(name), "noise_%04zu.bin", index);
      std::ofstream bin(dir / "paths" / name, std::ios::binary);
      write_noise(bin, noise);
    }
  }

  print_report(ctx.out, result.report);
  ctx.out << "output             " << dir.string() << "\n";
  return kExitOk;
}

int cmd_average(Context& ctx, const FlagSet& local) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = resolve(ctx, local);
  const Problem problem = make_problem(cfg);
  auto& out = ctx.out;
  out << std::setprecision(10);

  nlohmann::json averaged = nlohmann::json::object();
  if (problem.gamma1) {
    // Rebuild the averaged drift numerically and compare with the closed form.
    const AveragedCoefficientSet numeric =
        build_averaged(problem.original, cfg.average_horizon, cfg.epsilon);
    const double slope = numeric.drift(Vector::Constant(1, 1.0))[0];
    out << "averaged drift     eps * (1 + gamma1) * z\n";
    out << "gamma1             " << *problem.gamma1 << "\n";
    out << "1 + gamma1         " << 1.0 + *problem.gamma1 << " (closed form)\n";
    out << "1 + gamma1         " << slope << " (time_average + averaged_jump_drift, T = "
        << cfg.average_horizon << ")\n";
    averaged = {{"gamma1", *problem.gamma1},
                {"drift_coefficient_closed_form", 1.0 + *problem.gamma1},
                {"drift_coefficient_numeric", slope},
                {"average_horizon", cfg.average_horizon}};
  }

  const std::size_t dim = problem.original.state_dim;
  const double probe_horizon = *std::max_element(cfg.t1_grid.begin(), cfg.t1_grid.end());
  const HypothesisReport report =
      check_hypotheses(problem.original, problem.averaged_components, cfg.t1_grid,
                       default_probe_states(dim), default_probe_times(probe_horizon, 16));

  out << "C1 (Lipschitz)     " << report.lipschitz_estimate.value_or(0.0) << "\n";
  out << "C2 (growth)        " << report.growth_estimate.value_or(0.0) << "\n";
  auto print_env = [&](const char* name, const ResidualEnvelope& env) {
    out << std::left << std::setw(19) << name;
    for (double v : env.values) out << v << ' ';
    out << "[" << to_string(env.status) << "]\n";
  };
  out << "T1 grid            ";
  for (double t : report.t1_grid) out << t << ' ';
  out << "\n";
  print_env("alpha1", report.alpha1);
  print_env("alpha2", report.alpha2);
  print_env("alpha3", report.alpha3);
  print_env("alpha1 pointwise", report.pointwise_alpha1);

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  nlohmann::json doc = report;
  doc["averaged_coefficients"] = averaged;
  write_json_file(dir / "hypothesis.json", doc);
  write_json_file(dir / "manifest.json", {{"tool", "fracavg"},
                                          {"version", FRACAVG_VERSION},
                                          {"command", "average"},
                                          {"config", config_json(cfg)},
                                          {"problem", problem.parameters},
                                          {"timing_seconds", seconds_since(start)},
                                          {"files", {"hypothesis.json"}}});
  out << "output             " << dir.string() << "\n";
  return kExitOk;
}

struct BoundArgs {
  double c1 = 0.0;
  std::string alphas = "0,0,0";
  double z_moment = 1.0;
  double beta = 0.75;
  std::string epsilons = "1e-3";
  double lambda = 0.5;
  double L = 1.0;
  std::string out;
};

int cmd_bound(Context& ctx, const BoundArgs& args) {
  BoundInputs in;
  in.c1 = args.c1;
  const auto alphas = parse_number_list(args.alphas, "alphas");
  if (alphas.size() != 3) throw ConfigError("alphas", "expected exactly three values");
  in.alpha_sups = {alphas[0], alphas[1], alphas[2]};
  in.z_moment = args.z_moment;
  in.beta = args.beta;
  in.lambda = args.lambda;
  in.L = args.L;
  const auto eps = parse_number_list(args.epsilons, "epsilons");
  BoundReport report;
  try {
    report = theorem_bound(in, eps);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto& out = ctx.out;
  out << std::setprecision(10);
  out << "K11 " << report.k11 << "  K12 " << report.k12 << "\n";
  out << "K21 " << report.k21 << "  K22 " << report.k22 << "\n";
  out << "K31 " << report.k31 << "  K32 " << report.k32 << "\n";
  for (const auto& p : report.points) {
    out << "epsilon " << p.epsilon << "  bound " << p.bound << "  (C " << p.constant
        << ", series terms " << p.series_terms << ")\n";
  }
  if (!args.out.empty()) {
    std::filesystem::create_directories(args.out);
    write_json_file(std::filesystem::path(args.out) / "bound.json", report);
  }
  return kExitOk;
}

int cmd_study(Context& ctx, const FlagSet& local, const std::string& epsilons_flag) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, std::string>> extra;
  if (!epsilons_flag.empty()) extra.emplace_back("epsilons", epsilons_flag);
  const ExperimentConfig cfg = resolve(ctx, local, extra);
  StudyReport study;
  try {
    study = convergence_study(cfg, cfg.epsilons);
  } catch (const InsufficientResolutionError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  auto& out = ctx.out;
  out << std::setprecision(6);
  for (const auto& e : study.entries) {
    out << "epsilon " << e.epsilon << "  mean sup|X-Z|^2 " << e.mean_sup_sq << " +/- "
        << e.ci95_half_width << "\n";
  }
  if (study.slope) {
    out << "slope " << *study.slope << " +/- " << study.slope_ci95_half_width.value_or(0.0)
        << " (95%)\n";
  } else {
    out << "slope unavailable (" << study.status << " fit)\n";
  }
  out << "strictly decreasing " << (study.strictly_decreasing ? "yes" : "no") << "\n";

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  write_json_file(dir / "study.json", study);
  write_json_file(dir / "manifest.json", {{"tool", "fracavg"},
                                          {"version", FRACAVG_VERSION},
                                          {"command", "study"},
                                          {"config", config_json(cfg)},
                                          {"master_seed", cfg.master_seed},
                                          {"timing_seconds", seconds_since(start)},
                                          {"files", {"study.json"}}});
  out << "output " << dir.string() << "\n";
  return kExitOk;
}

int cmd_fig1(Context& ctx, const FlagSet& local, const std::string& which) {
  std::vector<std::string> cases;
  if (which == "all") {
    cases = {"a", "b", "c", "d"};
  } else if (which == "a" || which == "b" || which == "c" || which == "d") {
    cases = {which};
  } else {
    throw ConfigError("case", "expected a, b, c, d or all; got '" + which + "'");
  }
  const ExperimentConfig cfg = resolve(ctx, local);
  for (const auto& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    const Fig1Output result = reproduce_fig1(c, cfg);
    ctx.out << "case " << c << "  mean sup Er " << std::setprecision(6) << result.report.mean_sup_er
            << "  mean sup|X-Z|^2 " << result.report.mean_sup_sq << "  -> "
            << result.directory.string() << "  (" << std::setprecision(3) << seconds_since(start)
            << " s)\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional stochastic averaging simulator", "fracavg"};
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{{}, {}, out, err};
  app.add_option("--config", ctx.config_path, "flat key = value config file");
  ctx.global.add_all(app, kGlobalFlags);

  FlagSet simulate_flags, average_flags, study_flags, fig1_flags;
  bool save_noise = false;
  auto* simulate = app.add_subcommand("simulate", "coupled original/averaged ensemble");
  simulate_flags.add_all(*simulate, kProblemFlags);
  simulate->add_flag("--save-noise", save_noise, "write binary noise sidecars for saved paths");

  auto* average = app.add_subcommand("average", "averaged coefficients and hypothesis checks");
  average_flags.add_all(*average, kProblemFlags);
  static constexpr FlagKey kT1{"--t1-grid", "t1_grid", "comma-separated T1 values"};
  average_flags.add(*average, kT1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "evaluate the mean-square error bound");
  bound->add_option("--c1", bound_args.c1, "Lipschitz constant C1");
  bound->add_option("--alphas", bound_args.alphas, "sup alpha_1, alpha_2, alpha_3");
  bound->add_option("--z-moment", bound_args.z_moment, "1 + E sup|Z|^2");
  bound->add_option("--beta", bound_args.beta, "fractional order");
  bound->add_option("--epsilon,--epsilons", bound_args.epsilons, "epsilon value(s)");
  bound->add_option("--lambda", bound_args.lambda, "lambda in (0, 1)");
  bound->add_option("--L", bound_args.L, "L > 0");

  std::string study_eps;
  auto* study = app.add_subcommand("study", "epsilon-convergence study");
  study_flags.add_all(*study, kProblemFlags);
  study->add_option("--epsilons", study_eps, "comma-separated epsilon values (>= 3)");

  std::string fig1_case = "all";
  auto* fig1 = app.add_subcommand("fig1", "reproduce the four figure cases");
  for (const auto& spec : kProblemFlags) {
    if (std::string(spec.key) != "case" && std::string(spec.key) != "problem") {
      fig1_flags.add(*fig1, spec);
    }
  }
  fig1->add_option("--case", fig1_case, "a|b|c|d|all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (bound->parsed()) {
    if (auto dir = ctx.global.get("out_dir")) bound_args.out = *dir;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(ctx, simulate_flags, save_noise);
    if (average->parsed()) return cmd_average(ctx, average_flags);
    if (bound->parsed()) return cmd_bound(ctx, bound_args);
    if (study->parsed()) return cmd_study(ctx, study_flags, study_eps);
    if (fig1->parsed()) return cmd_fig1(ctx, fig1_flags, fig1_case);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fracavg
