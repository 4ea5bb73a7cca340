#include "fracavg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fracavg/levy.hpp"
#include "fracavg/solver.hpp"

namespace fracavg {

ConfigError::ConfigError(std::string where, const std::string& message)
    : std::invalid_argument(where + ": " + message), where_(std::move(where)) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <typename Field>
Setter number(Field ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.*field = to_double(k, v);
  };
}

template <typename Field>
Setter count(Field ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.*field = static_cast<Field>(to_unsigned(k, v));
  };
}

Setter text(std::string ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string&, const std::string& v) {
    c.*field = trim(v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem", text(&ExperimentConfig::problem)},
      {"case",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         apply_fig_case(c, trim(v));
       }},
      {"beta", number(&ExperimentConfig::beta)},
      {"alpha", number(&ExperimentConfig::alpha)},
      {"gamma", number(&ExperimentConfig::gamma)},
      {"cutoff_c", number(&ExperimentConfig::cutoff_c)},
      {"cutoff_delta", number(&ExperimentConfig::cutoff_delta)},
      {"epsilon", number(&ExperimentConfig::epsilon)},
      {"x0", number(&ExperimentConfig::x0)},
      {"rate", number(&ExperimentConfig::rate)},
      {"horizon", number(&ExperimentConfig::horizon)},
      {"step", number(&ExperimentConfig::step)},
      {"n_paths", count(&ExperimentConfig::n_paths)},
      {"master_seed", count(&ExperimentConfig::master_seed)},
      {"workers", count(&ExperimentConfig::workers)},
      {"write_paths", count(&ExperimentConfig::write_paths)},
      {"compute_bound",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.compute_bound = to_bool(k, v);
       }},
      {"bound_lambda", number(&ExperimentConfig::bound_lambda)},
      {"bound_L", number(&ExperimentConfig::bound_L)},
      {"epsilons",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.epsilons = parse_number_list(v, k);
       }},
      {"t1_grid",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.t1_grid = parse_number_list(v, k);
       }},
      {"average_horizon", number(&ExperimentConfig::average_horizon)},
      {"f", text(&ExperimentConfig::f)},
      {"g", text(&ExperimentConfig::g)},
      {"h", text(&ExperimentConfig::h)},
      {"fbar", text(&ExperimentConfig::fbar)},
      {"gbar", text(&ExperimentConfig::gbar)},
      {"hbar", text(&ExperimentConfig::hbar)},
      {"jump_mode", text(&ExperimentConfig::jump_mode)},
      {"out_dir", text(&ExperimentConfig::out_dir)},
  };
  return table;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) throw ConfigError(key, "empty entry in number list '" + text + "'");
    out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

void set_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown configuration key");
  it->second(config, key, value);
}

void apply_fig_case(ExperimentConfig& config, const std::string& fig_case) {
  struct Case {
    double beta, alpha, gamma;
  };
  static const std::map<std::string, Case> cases = {
      {"a", {0.6, 0.3, 3.0}},
      {"b", {0.6, 1.1, 0.6}},
      {"c", {0.85, 0.3, 0.6}},
      {"d", {0.85, 1.9, 3.0}},
  };
  if (fig_case.empty()) {
    config.fig_case.clear();
    return;
  }
  const auto it = cases.find(fig_case);
  if (it == cases.end()) throw ConfigError("case", "expected one of a, b, c, d; got '" + fig_case + "'");
  config.fig_case = fig_case;
  config.beta = it->second.beta;
  config.alpha = it->second.alpha;
  config.gamma = it->second.gamma;
  config.epsilon = 1e-3;
  config.cutoff_c = 0.5;
  config.x0 = 0.1;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentConfig& c) {
  return {
      {"problem", c.problem},
      {"case", c.fig_case},
      {"beta", format_double(c.beta)},
      {"alpha", format_double(c.alpha)},
      {"gamma", format_double(c.gamma)},
      {"cutoff_c", format_double(c.cutoff_c)},
      {"cutoff_delta", format_double(c.cutoff_delta)},
      {"epsilon", format_double(c.epsilon)},
      {"x0", format_double(c.x0)},
      {"rate", format_double(c.rate)},
      {"horizon", format_double(c.horizon)},
      {"step", format_double(c.step)},
      {"n_paths", std::to_string(c.n_paths)},
      {"master_seed", std::to_string(c.master_seed)},
      {"workers", std::to_string(c.workers)},
      {"write_paths", std::to_string(c.write_paths)},
      {"compute_bound", c.compute_bound ? "true" : "false"},
      {"bound_lambda", format_double(c.bound_lambda)},
      {"bound_L", format_double(c.bound_L)},
      {"epsilons", format_list(c.epsilons)},
      {"t1_grid", format_list(c.t1_grid)},
      {"average_horizon", format_double(c.average_horizon)},
      {"f", c.f},
      {"g", c.g},
      {"h", c.h},
      {"fbar", c.fbar},
      {"gbar", c.gbar},
      {"hbar", c.hbar},
      {"jump_mode", c.jump_mode},
      {"out_dir", c.out_dir},
  };
}

void apply_config_stream(ExperimentConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    try {
      set_field(config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + " (" + key + ")", e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  apply_config_stream(config, in, path.string());
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  for (const auto& [key, value] : to_key_values(config)) out << key << " = " << value << '\n';
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* field, const std::string& why) {
    if (!ok) throw ConfigError(field, why);
  };
  require(c.beta > 0.5 && c.beta < 1.0, "beta", "must lie in (0.5, 1)");
  require(c.epsilon > 0.0 && c.epsilon <= kEpsilonMax, "epsilon", "must lie in (0, 1]");
  require(c.horizon > 0.0, "horizon", "must be positive");
  require(c.step > 0.0, "step", "must be positive");
  try {
    TimeGrid::from_horizon(c.horizon, c.step);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("step", e.what());
  }
  require(c.n_paths >= 1, "n_paths", "must be at least 1");
  require(c.bound_lambda > 0.0 && c.bound_lambda < 1.0, "bound_lambda", "must lie in (0, 1)");
  require(c.bound_L > 0.0, "bound_L", "must be positive");
  require(c.average_horizon > 0.0, "average_horizon", "must be positive");
  for (double e : c.epsilons) {
    require(e > 0.0 && e <= kEpsilonMax, "epsilons", "every value must lie in (0, 1]");
  }
  for (double t : c.t1_grid) require(t > 0.0, "t1_grid", "every value must be positive");
  require(c.jump_mode == "compensated_prm" || c.jump_mode == "deterministic_nu_drift", "jump_mode",
          "must be compensated_prm or deterministic_nu_drift");
  require(c.out_dir.size() > 0, "out_dir", "must not be empty");

  const bool needs_measure = c.problem == "eq10" || !c.h.empty();
  if (needs_measure) {
    JumpMeasureSpec spec{c.gamma, c.alpha, c.cutoff_c, c.effective_delta()};
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      const auto dot = msg.find('.');
      const auto colon = msg.find(':');
      const std::string field = (dot != std::string::npos && colon != std::string::npos)
                                    ? msg.substr(dot + 1, colon - dot - 1)
                                    : std::string("gamma");
      throw ConfigError(field, msg);
    }
  }
}

}  // namespace fracavg
