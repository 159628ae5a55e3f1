#pragma once

// JSON run and sweep configurations.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/model.hpp"
#include "kslab/stepping.hpp"

namespace kslab {

enum class SolverChoice { Primal, Mass, Both };

constexpr std::string_view to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::Primal: return "primal";
    case SolverChoice::Mass: return "mass";
    case SolverChoice::Both: return "both";
  }
  return "primal";
}

struct RunConfig {
  ModelParams params;
  InitialDataSpec initial;
  StepperConfig stepper;
  SolverChoice solver = SolverChoice::Primal;
  std::vector<double> p_list;
  /// Exponent for the lower bound on the blow-up time; N/2 + 0.5 when absent.
  std::optional<double> bound_p;
  /// Drift constant C for the moment-functional upper bound.
  double drift = 0.0;

  double effective_bound_p() const { return bound_p.value_or(0.5 * params.dim + 0.5); }
  std::vector<double> effective_p_list() const {
    return p_list.empty() ? default_p_list(params.dim) : p_list;
  }
};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepConfig {
  RunConfig base;
  std::vector<SweepAxis> axes;
  std::size_t max_points = 256;

  std::size_t points() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }
};

namespace detail {

inline const std::set<std::string>& run_keys() {
  static const std::set<std::string> keys = {
      "dim", "radius", "k_f", "alpha", "lambda", "mu", "k", "profile", "m0", "concentration",
      "solver", "nodes", "grading", "cfl", "dt_min", "dt_max", "t_end", "u_stop", "p_list",
      "bound_p", "drift", "record_every", "max_steps"};
  return keys;
}

inline const std::set<std::string>& sweep_axis_names() {
  static const std::set<std::string> names = {"alpha", "k", "mu", "dim", "m0"};
  return names;
}

[[noreturn]] inline void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

inline double get_number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) config_error(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline std::size_t get_count(const nlohmann::json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    config_error(std::string("'") + key + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

inline void apply_axis_value(RunConfig& cfg, const std::string& name, double value) {
  if (name == "alpha") cfg.params.alpha = value;
  else if (name == "k") cfg.params.k = value;
  else if (name == "mu") cfg.params.mu = value;
  else if (name == "m0") cfg.initial.m0 = value;
  else if (name == "dim") {
    if (value != static_cast<int>(value)) config_error("dim must be an integer");
    cfg.params.dim = static_cast<int>(value);
  } else {
    config_error("unknown sweep axis '" + name + "'");
  }
}

}  // namespace detail

/// Rejects anything that would make a run meaningless; all failures carry
/// ErrorCode::ConfigError.
inline void validate(const RunConfig& cfg) {
  try {
    cfg.params.validate();
    cfg.initial.validate();
    cfg.stepper.validate();
  } catch (const Error& e) {
    detail::config_error(e.what());
  }
  for (double p : cfg.p_list) {
    if (!(p >= 1.0)) detail::config_error("p_list entries must be >= 1");
  }
  if (cfg.bound_p && !(*cfg.bound_p > 0.5 * cfg.params.dim)) {
    throw Error(ErrorCode::InvalidP, "bound_p must exceed N/2");
  }
  if (!(cfg.drift >= 0.0)) detail::config_error("drift must be >= 0");
}

/// Parses a run configuration. `extra_keys` lists additional top-level keys the
/// caller handles itself (the sweep axes, for instance).
inline RunConfig parse_run_config(const nlohmann::json& j, const std::set<std::string>& extra_keys = {}) {
  using detail::config_error;
  if (!j.is_object()) config_error("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!detail::run_keys().count(key) && !extra_keys.count(key)) {
      config_error("unknown configuration key '" + key + "'");
    }
  }
  RunConfig cfg;
  auto& p = cfg.params;
  if (j.contains("dim")) {
    if (!j.at("dim").is_number_integer()) config_error("'dim' must be an integer");
    p.dim = j.at("dim").get<int>();
  }
  p.radius = detail::get_number(j, "radius", p.radius);
  p.k_f = detail::get_number(j, "k_f", p.k_f);
  p.alpha = detail::get_number(j, "alpha", p.alpha);
  p.lambda = detail::get_number(j, "lambda", p.lambda);
  p.mu = detail::get_number(j, "mu", p.mu);
  p.k = detail::get_number(j, "k", p.k);

  if (j.contains("profile")) {
    if (!j.at("profile").is_string()) config_error("'profile' must be a string");
    const auto kind = parse_profile(j.at("profile").get<std::string>());
    if (!kind) config_error("unknown profile '" + j.at("profile").get<std::string>() + "'");
    cfg.initial.kind = *kind;
  }
  cfg.initial.m0 = detail::get_number(j, "m0", cfg.initial.m0);
  cfg.initial.concentration = detail::get_number(j, "concentration", cfg.initial.concentration);

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (!s.is_string()) config_error("'solver' must be a string");
    const auto name = s.get<std::string>();
    if (name == "primal") cfg.solver = SolverChoice::Primal;
    else if (name == "mass") cfg.solver = SolverChoice::Mass;
    else if (name == "both") cfg.solver = SolverChoice::Both;
    else config_error("unknown solver '" + name + "'");
  }

  auto& st = cfg.stepper;
  st.nodes = detail::get_count(j, "nodes", st.nodes);
  st.grading = detail::get_number(j, "grading", st.grading);
  st.cfl = detail::get_number(j, "cfl", st.cfl);
  st.dt_min = detail::get_number(j, "dt_min", st.dt_min);
  st.dt_max = detail::get_number(j, "dt_max", st.dt_max);
  st.t_end = detail::get_number(j, "t_end", st.t_end);
  st.u_stop = detail::get_number(j, "u_stop", st.u_stop);
  st.record_every = detail::get_count(j, "record_every", st.record_every);
  st.max_steps = detail::get_count(j, "max_steps", st.max_steps);

  if (j.contains("p_list")) {
    const auto& pl = j.at("p_list");
    if (!pl.is_array() || pl.empty()) config_error("'p_list' must be a nonempty array");
    for (const auto& v : pl) {
      if (!v.is_number()) config_error("'p_list' entries must be numbers");
      cfg.p_list.push_back(v.get<double>());
    }
  }
  if (j.contains("bound_p")) cfg.bound_p = detail::get_number(j, "bound_p", 0.0);
  cfg.drift = detail::get_number(j, "drift", cfg.drift);
  validate(cfg);
  return cfg;
}

/// A sweep configuration is a run configuration plus
///   "axes": {"alpha": [..], "k": [..], ...}  (ordered as written)
///   "max_points": cap on the number of grid points.
inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
  using detail::config_error;
  SweepConfig sc;
  sc.base = parse_run_config(j, {"axes", "max_points"});
  if (!j.contains("axes")) config_error("sweep needs 'axes'");
  const auto& axes = j.at("axes");
  if (!axes.is_object() || axes.empty()) config_error("'axes' must be a nonempty object");
  for (const auto& [name, values] : axes.items()) {
    if (!detail::sweep_axis_names().count(name)) config_error("unknown sweep axis '" + name + "'");
    if (!values.is_array() || values.empty()) config_error("axis '" + name + "' is empty");
    SweepAxis axis{name, {}};
    for (const auto& v : values) {
      if (!v.is_number()) config_error("axis '" + name + "' has a non-numeric value");
      axis.values.push_back(v.get<double>());
    }
    sc.axes.push_back(std::move(axis));
  }
  sc.max_points = detail::get_count(j, "max_points", sc.max_points);
  if (sc.points() > sc.max_points) {
    config_error("sweep has " + std::to_string(sc.points()) + " points, above max_points");
  }
  return sc;
}

/// Configuration of grid point `index` (row-major over the axes, last axis fastest).
inline RunConfig sweep_point(const SweepConfig& sc, std::size_t index, std::vector<double>* values = nullptr) {
  RunConfig cfg = sc.base;
  std::vector<double> coords(sc.axes.size());
  for (std::size_t a = sc.axes.size(); a-- > 0;) {
    const auto& axis = sc.axes[a];
    coords[a] = axis.values[index % axis.values.size()];
    index /= axis.values.size();
    detail::apply_axis_value(cfg, axis.name, coords[a]);
  }
  if (values) *values = coords;
  return cfg;
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["dim"] = cfg.params.dim;
  j["radius"] = cfg.params.radius;
  j["k_f"] = cfg.params.k_f;
  j["alpha"] = cfg.params.alpha;
  j["lambda"] = cfg.params.lambda;
  j["mu"] = cfg.params.mu;
  j["k"] = cfg.params.k;
  j["profile"] = std::string(to_string(cfg.initial.kind));
  j["m0"] = cfg.initial.m0;
  j["concentration"] = cfg.initial.concentration;
  j["solver"] = std::string(to_string(cfg.solver));
  j["nodes"] = cfg.stepper.nodes;
  j["grading"] = cfg.stepper.grading;
  j["cfl"] = cfg.stepper.cfl;
  j["dt_min"] = cfg.stepper.dt_min;
  j["dt_max"] = cfg.stepper.dt_max;
  j["t_end"] = cfg.stepper.t_end;
  j["u_stop"] = cfg.stepper.u_stop;
  j["record_every"] = cfg.stepper.record_every;
  j["max_steps"] = cfg.stepper.max_steps;
  j["p_list"] = cfg.effective_p_list();
  j["bound_p"] = cfg.effective_bound_p();
  j["drift"] = cfg.drift;
  return j;
}

}  // namespace kslab
