#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracavg {

/// Invalid configuration. `where` is "field" or "file:line (field)".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string where, const std::string& message);
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Everything that determines an experiment. Keys of the flat config file
/// mirror these fields one to one (see to_key_values for the spelling).
struct ExperimentConfig {
  std::string problem = "eq10";
  /// Figure case a|b|c|d; setting it also sets beta, alpha, gamma, epsilon,
  /// cutoff_c and x0 to the case values.
  std::string fig_case;

  double beta = 0.6;
  double alpha = 0.3;
  double gamma = 3.0;
  double cutoff_c = 0.5;
  /// Inner simulation cutoff; 0 selects cutoff_c * 1e-3.
  double cutoff_delta = 0.0;
  double epsilon = 1e-3;
  double x0 = 0.1;
  /// Linear rate of the Mittag-Leffler benchmark f(t, x) = rate * x.
  double rate = 1.0;

  double horizon = 10.0;
  double step = 1e-2;
  std::size_t n_paths = 200;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  std::size_t write_paths = 1;
  bool compute_bound = true;

  double bound_lambda = 0.5;
  double bound_L = 1.0;

  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  std::vector<double> t1_grid{10.0, 100.0, 1000.0};
  /// Horizon of the numerical time averages built for custom problems and
  /// the averaging report.
  double average_horizon = 314.15926535897931;

  /// Custom scalar problem: f(t,x), g(t,x), h(t,x,m) and the averaged forms
  /// fbar(x), gbar(x), hbar(x,m); "auto" averages numerically.
  std::string f;
  std::string g = "0";
  std::string h;
  std::string fbar = "auto";
  std::string gbar = "auto";
  std::string hbar = "auto";
  std::string jump_mode = "compensated_prm";

  std::string out_dir = "fracavg_out";

  double effective_delta() const { return cutoff_delta > 0.0 ? cutoff_delta : cutoff_c * 1e-3; }
};

/// Assigns one field from its textual value. Throws ConfigError naming the key.
void set_field(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Applies figure case a|b|c|d (beta, alpha, gamma) with epsilon = 1e-3,
/// c = 0.5 and X0 = 0.1.
void apply_fig_case(ExperimentConfig& config, const std::string& fig_case);

/// All fields as (key, value) pairs in a fixed order, values formatted so that
/// parsing them back reproduces the config exactly.
std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentConfig& config);

/// Reads "key = value" lines; '#' starts a comment. Later keys win.
void apply_config_stream(ExperimentConfig& config, std::istream& in, const std::string& source);
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

void write_config(std::ostream& out, const ExperimentConfig& config);

/// Checks cross-field invariants; throws ConfigError naming the field.
void validate(const ExperimentConfig& config);

/// Splits "1e-2, 1e-3" into numbers.
std::vector<double> parse_number_list(const std::string& text, const std::string& key);

}  // namespace fracavg
