#include "fracavg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "fracavg/levy.hpp"
#include "fracavg/problems.hpp"

namespace fracavg {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct PathOutcome {
  bool ok = false;
  double sup_sq = 0.0;
  double sup_z_sq = 0.0;
  std::vector<double> er;
  std::optional<CoupledResult> kept;
  PathFailure failure;
};

std::vector<double> bound_t1_grid(double horizon, double step) {
  std::vector<double> grid;
  for (double frac : {1e-3, 1e-2, 1e-1, 1.0}) {
    const double t1 = horizon * frac;
    if (t1 >= step) grid.push_back(t1);
  }
  if (grid.empty()) grid.push_back(horizon);
  return grid;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

EnsembleResult run_ensemble(const ExperimentConfig& config) {
  const Problem problem = make_problem(config);
  const TimeGrid grid = TimeGrid::from_horizon(config.horizon, config.step);
  const bool jumps = problem.needs_jump_events();
  const JumpMeasureSpec spec{config.gamma, config.alpha, config.cutoff_c, config.effective_delta()};

  std::vector<PathOutcome> outcomes(config.n_paths);
  parallel_for(config.n_paths, config.workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_stream_seed(config.master_seed, i);
    const NoiseRealization noise =
        jumps ? sample_noise(spec, grid, problem.original.noise_dim, seed)
              : sample_brownian_noise(grid, problem.original.noise_dim, seed);
    PathOutcome& out = outcomes[i];
    try {
      CoupledResult r = solve_coupled(problem.original, problem.averaged, noise, problem.x0,
                                      config.epsilon, problem.beta);
      out.ok = true;
      out.sup_sq = r.sup_sq_error;
      for (const Vector& z : r.averaged.states) out.sup_z_sq = std::max(out.sup_z_sq, z.squaredNorm());
      out.er = r.er;
      if (i < config.write_paths) out.kept = std::move(r);
    } catch (const SolverError& e) {
      out.failure = PathFailure{i, e.system(), e.step(), e.what()};
    }
  });

  EnsembleResult result;
  ErrorReport& rep = result.report;
  rep.problem = problem.name;
  rep.epsilon = config.epsilon;
  rep.n_paths = config.n_paths;
  rep.master_seed = config.master_seed;
  rep.step = config.step;
  rep.per_path_sup_sq.resize(config.n_paths, std::numeric_limits<double>::quiet_NaN());
  rep.er_mean_curve.assign(grid.n_steps + 1, 0.0);

  double sum = 0.0, sum_er = 0.0, sum_z = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    PathOutcome& o = outcomes[i];
    if (!o.ok) {
      rep.failures.push_back(o.failure);
      continue;
    }
    ++ok;
    rep.per_path_sup_sq[i] = o.sup_sq;
    sum += o.sup_sq;
    sum_er += std::sqrt(o.sup_sq);
    sum_z += o.sup_z_sq;
    for (std::size_t n = 0; n < o.er.size(); ++n) rep.er_mean_curve[n] += o.er[n];
    if (o.kept) result.sample_paths.emplace_back(i, std::move(*o.kept));
  }
  if (rep.failures.size() * 10 > config.n_paths) {
    throw EnsembleError(std::to_string(rep.failures.size()) + " of " +
                        std::to_string(config.n_paths) +
                        " paths failed (more than 10%); first failure: " +
                        rep.failures.front().message);
  }

  const double n = static_cast<double>(ok);
  rep.mean_sup_sq = sum / n;
  rep.mean_sup_er = sum_er / n;
  rep.z_moment = 1.0 + sum_z / n;
  for (double& v : rep.er_mean_curve) v /= n;
  if (ok > 1) {
    double ss = 0.0;
    for (double v : rep.per_path_sup_sq) {
      if (!std::isnan(v)) ss += (v - rep.mean_sup_sq) * (v - rep.mean_sup_sq);
    }
    rep.ci95_half_width = kZ95 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }

  if (config.compute_bound) {
    try {
      const std::size_t dim = problem.original.state_dim;
      HypothesisReport hyp = check_hypotheses(
          problem.original, problem.averaged_components, bound_t1_grid(config.horizon, config.step),
          default_probe_states(dim), default_probe_times(config.horizon, 8));
      BoundInputs in;
      in.c1 = hyp.lipschitz_estimate.value_or(0.0);
      in.alpha_sups = hyp.alpha_sups();
      in.z_moment = rep.z_moment;
      in.beta = config.beta;
      in.lambda = config.bound_lambda;
      in.L = config.bound_L;
      const double eps[] = {config.epsilon};
      rep.bound = theorem_bound(in, eps);
      rep.hypotheses = std::move(hyp);
    } catch (const std::runtime_error& e) {
      rep.bound_note = e.what();
    }
  }
  return result;
}

StudyReport convergence_study(const ExperimentConfig& base, std::vector<double> epsilons) {
  if (epsilons.size() < 3) {
    throw std::invalid_argument("convergence_study: need at least 3 epsilon values");
  }
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  if (std::adjacent_find(epsilons.begin(), epsilons.end()) != epsilons.end()) {
    throw std::invalid_argument("convergence_study: epsilon values must be distinct");
  }
  if (epsilons.front() / epsilons.back() < 100.0 * (1.0 - 1e-9)) {
    throw std::invalid_argument("convergence_study: epsilon values must span two decades");
  }

  StudyReport study;
  for (double eps : epsilons) {
    ExperimentConfig cfg = base;
    cfg.epsilon = eps;
    cfg.compute_bound = false;
    cfg.write_paths = 0;
    const ErrorReport rep = run_ensemble(cfg).report;
    study.entries.push_back(
        StudyEntry{eps, rep.mean_sup_sq, rep.ci95_half_width, rep.mean_sup_er, rep.failures.size()});
  }

  const auto& e = study.entries;
  study.strictly_decreasing = true;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (!(e[i].mean_sup_sq < e[i - 1].mean_sup_sq)) study.strictly_decreasing = false;
  }

  if (std::any_of(e.begin(), e.end(), [](const StudyEntry& s) { return !(s.mean_sup_sq > 0.0); })) {
    study.status = "degenerate";
    return study;
  }

  bool resolved = false;
  for (std::size_t i = 0; i < e.size() && !resolved; ++i) {
    for (std::size_t k = i + 1; k < e.size(); ++k) {
      const bool overlap = e[i].mean_sup_sq - e[i].ci95_half_width <=
                               e[k].mean_sup_sq + e[k].ci95_half_width &&
                           e[k].mean_sup_sq - e[k].ci95_half_width <=
                               e[i].mean_sup_sq + e[i].ci95_half_width;
      if (!overlap) {
        resolved = true;
        break;
      }
    }
  }
  if (!resolved) {
    throw InsufficientResolutionError(
        "convergence_study: confidence intervals overlap for every epsilon pair; "
        "increase n_paths or widen the epsilon range");
  }

  const std::size_t m = e.size();
  std::vector<double> x(m), y(m), var(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(e[i].epsilon);
    y[i] = std::log(e[i].mean_sup_sq);
    const double rel_se = e[i].ci95_half_width / kZ95 / e[i].mean_sup_sq;
    var[i] = rel_se * rel_se;
  }
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, svar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    svar += (x[i] - xm) * (x[i] - xm) * var[i];
  }
  study.status = "ok";
  study.slope = sxy / sxx;
  study.slope_ci95_half_width = kZ95 * std::sqrt(svar) / sxx;
  return study;
}

Fig1Output reproduce_fig1(const std::string& fig_case, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.problem = "eq10";
  apply_fig_case(cfg, fig_case);
  Fig1Output out;
  out.directory = std::filesystem::path(base.out_dir) / ("fig1_" + fig_case);
  cfg.out_dir = out.directory.string();
  const EnsembleResult result = run_ensemble(cfg);
  write_run(out.directory, cfg, result, {{"command", "fig1"}});
  out.report = result.report;
  return out;
}

void to_json(nlohmann::json& j, const ErrorReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) {
    failures.push_back(
        {{"index", f.index}, {"system", f.system}, {"step", f.step}, {"message", f.message}});
  }
  j = nlohmann::json{
      {"problem", r.problem},
      {"epsilon", r.epsilon},
      {"n_paths", r.n_paths},
      {"n_succeeded", r.n_succeeded()},
      {"n_failed", r.failures.size()},
      {"master_seed", r.master_seed},
      {"failures", failures},
      {"mean_sup_sq_error", r.mean_sup_sq},
      {"ci95_half_width", r.ci95_half_width},
      {"mean_sup_er", r.mean_sup_er},
      {"z_moment", r.z_moment},
      {"per_path_sup_sq_error", r.per_path_sup_sq},
      {"er_mean_curve", {{"step", r.step}, {"values", r.er_mean_curve}}},
  };
  if (r.bound) {
    j["bound"] = *r.bound;
    j["bound_value"] = r.bound->points.front().bound;
  } else {
    j["bound"] = nullptr;
    j["bound_value"] = nullptr;
  }
  if (r.hypotheses) j["hypotheses"] = *r.hypotheses;
  if (!r.bound_note.empty()) j["bound_note"] = r.bound_note;
}

void to_json(nlohmann::json& j, const StudyReport& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"epsilon", e.epsilon},
                       {"mean_sup_sq_error", e.mean_sup_sq},
                       {"ci95_half_width", e.ci95_half_width},
                       {"mean_sup_er", e.mean_sup_er},
                       {"n_failed", e.n_failed}});
  }
  j = nlohmann::json{
      {"entries", entries},
      {"status", s.status},
      {"slope", s.slope ? nlohmann::json(*s.slope) : nlohmann::json(nullptr)},
      {"slope_ci95_half_width",
       s.slope_ci95_half_width ? nlohmann::json(*s.slope_ci95_half_width) : nlohmann::json(nullptr)},
      {"strictly_decreasing", s.strictly_decreasing},
  };
}

nlohmann::json config_json(const ExperimentConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : to_key_values(config)) j[k] = v;
  return j;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

void write_run(const std::filesystem::path& dir, const ExperimentConfig& config,
               const EnsembleResult& result, const nlohmann::json& manifest_extra) {
  std::filesystem::create_directories(dir / "paths");

  nlohmann::json files = nlohmann::json::array({"report.json", "config.cfg"});
  for (const auto& [index, path] : result.sample_paths) {
    char name[64];
    std::snprintf(name, sizeof(name), "path_%04zu.csv", index);
    std::ofstream out(dir / "paths" / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "paths" / name).string());
    write_coupled_csv(out, path);
    files.push_back(std::string("paths/") + name);
  }

  write_json_file(dir / "report.json", result.report);
  {
    std::ofstream cfg(dir / "config.cfg", std::ios::binary);
    write_config(cfg, config);
  }

  const Problem problem = make_problem(config);
  nlohmann::json manifest = {
      {"tool", "fracavg"},
      {"version", FRACAVG_VERSION},
      {"config", config_json(config)},
      {"master_seed", config.master_seed},
      {"problem", problem.parameters},
      {"grid", {{"horizon", config.horizon}, {"step", config.step}}},
      {"n_paths", config.n_paths},
      {"files", files},
  };
  if (problem.original.jump_measure) manifest["cutoff_delta_effective"] = config.effective_delta();
  for (const auto& [k, v] : manifest_extra.items()) manifest[k] = v;
  write_json_file(dir / "manifest.json", manifest);
}

}  // namespace fracavg
