#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracavg/averaging.hpp"
#include "fracavg/config.hpp"
#include "fracavg/solver.hpp"
#include "json.hpp"

namespace fracavg {

/// Raised when more than 10% of the paths of an ensemble fail.
class EnsembleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A convergence study whose confidence intervals overlap for every pair of
/// epsilon values cannot resolve a rate.
class InsufficientResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathFailure {
  std::size_t index = 0;
  std::string system;
  std::size_t step = 0;
  std::string message;
};

struct ErrorReport {
  std::string problem;
  double epsilon = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t master_seed = 0;

  /// sup_n |X_n - Z_n|^2 per path; failed paths hold NaN.
  std::vector<double> per_path_sup_sq;
  std::vector<PathFailure> failures;

  double mean_sup_sq = 0.0;
  /// 95% half-width from the path-level sample variance.
  double ci95_half_width = 0.0;
  /// Mean over paths of sup_n Er(t_n).
  double mean_sup_er = 0.0;
  double step = 0.0;
  /// Mean over paths of Er(t_n), one entry per grid point.
  std::vector<double> er_mean_curve;
  /// 1 + mean over paths of sup_n |Z_n|^2.
  double z_moment = 1.0;

  std::optional<BoundReport> bound;
  std::optional<HypothesisReport> hypotheses;
  std::string bound_note;

  std::size_t n_succeeded() const { return n_paths - failures.size(); }
};

struct EnsembleResult {
  ErrorReport report;
  /// The first `write_paths` coupled paths that succeeded, by index.
  std::vector<std::pair<std::size_t, CoupledResult>> sample_paths;
};

/// Per-path noise streams come from (master_seed, path index), so the result
/// does not depend on the worker count or scheduling.
EnsembleResult run_ensemble(const ExperimentConfig& config);

struct StudyEntry {
  double epsilon = 0.0;
  double mean_sup_sq = 0.0;
  double ci95_half_width = 0.0;
  double mean_sup_er = 0.0;
  std::size_t n_failed = 0;
};

struct StudyReport {
  /// Sorted by decreasing epsilon.
  std::vector<StudyEntry> entries;
  /// "ok" or "degenerate" (some mean error is zero, so no log-log fit exists).
  std::string status;
  std::optional<double> slope;
  std::optional<double> slope_ci95_half_width;
  bool strictly_decreasing = false;
};

/// Ensembles at each epsilon with common random numbers, then a least-squares
/// fit of log(mean sup-square error) against log(epsilon). Needs at least three
/// values spanning two decades.
StudyReport convergence_study(const ExperimentConfig& base, std::vector<double> epsilons);

struct Fig1Output {
  std::filesystem::path directory;
  ErrorReport report;
};

/// Runs figure case a|b|c|d (overrides taken from `base`) and writes the run
/// directory under base.out_dir / "fig1_<case>".
Fig1Output reproduce_fig1(const std::string& fig_case, const ExperimentConfig& base);

void to_json(nlohmann::json& j, const ErrorReport& report);
void to_json(nlohmann::json& j, const StudyReport& report);

/// Flat config as a JSON object of strings.
nlohmann::json config_json(const ExperimentConfig& config);

/// manifest.json (with `manifest_extra` merged in), report.json, config.cfg and
/// paths/path_<index>.csv under `dir`.
void write_run(const std::filesystem::path& dir, const ExperimentConfig& config,
               const EnsembleResult& result, const nlohmann::json& manifest_extra);

/// Writes `value` as indented JSON followed by a newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace fracavg
