#pragma once

// Flat `section.key = value` run configuration. Every key has a default;
// derived defaults (contact stiffnesses, tolerances, d_max) follow the
// resolved geometry and material unless set explicitly.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shellcontact/contact.hpp"
#include "shellcontact/errors.hpp"
#include "shellcontact/geometry.hpp"
#include "shellcontact/solver.hpp"

namespace shellcontact {

struct RunConfig {
  ShellModel model;
  ContactParams contact;
  Schedule schedule;
  SolverParams solver;
  std::string output_dir = "out";
  std::vector<std::size_t> snapshot_steps;
  /// Reserved; the solver is deterministic and never reads it.
  std::uint64_t seed = 0;

  std::size_t total_steps() const {
    return schedule.n_steps_load + (schedule.unload ? schedule.n_steps_unload : 0);
  }

  void validate() const {
    model.validate();
    contact.validate();
    schedule.validate(model);
    solver.validate();
    for (std::size_t s : snapshot_steps)
      if (s > total_steps())
        throw ConfigError("output.snapshot_steps",
                          "step " + std::to_string(s) + " exceeds the schedule length " +
                              std::to_string(total_steps()));
  }

  static RunConfig defaults() {
    RunConfig c;
    c.resolve_derived({});
    return c;
  }

  /// Fills every derived default whose key is not in `explicit_keys`.
  void resolve_derived(const std::set<std::string>& explicit_keys) {
    const ContactParams cd = ContactParams::defaults(model, contact.mu);
    if (!explicit_keys.count("contact.k_n_Pa_per_m")) contact.k_n = cd.k_n;
    if (!explicit_keys.count("contact.k_t_Pa_per_m")) contact.k_t = contact.k_n;
    if (!explicit_keys.count("contact.g_tol_m")) contact.g_tol = cd.g_tol;
    if (!explicit_keys.count("contact.cone_tol_Pa")) contact.cone_tol = cd.cone_tol;
    if (!explicit_keys.count("schedule.d_max_m")) schedule.d_max = Schedule::defaults(model).d_max;
    if (!explicit_keys.count("solver.residual_tol_N"))
      solver.residual_tol = SolverParams::defaults(model).residual_tol;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline std::vector<std::size_t> parse_step_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(parse_unsigned(key, item)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// One configuration key: how to set it from text and how to echo it.
struct ConfigKey {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
ConfigKey real_key(std::string name, T RunConfig::*part, double T::*field) {
  return {name,
          [name, part, field](RunConfig& c, const std::string& v) {
            c.*part.*field = parse_double(name, v);
          },
          [part, field](const RunConfig& c) { return format_double(c.*part.*field); }};
}

template <typename T>
ConfigKey count_key(std::string name, T RunConfig::*part, std::size_t T::*field) {
  return {name,
          [name, part, field](RunConfig& c, const std::string& v) {
            c.*part.*field = static_cast<std::size_t>(parse_unsigned(name, v));
          },
          [part, field](const RunConfig& c) { return std::to_string(c.*part.*field); }};
}

}  // namespace detail

/// Every accepted key, in echo order.
inline const std::vector<ConfigKey>& config_keys() {
  using detail::count_key;
  using detail::real_key;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(real_key("geometry.R_m", &RunConfig::model, &ShellModel::R));
    k.push_back(real_key("geometry.h_m", &RunConfig::model, &ShellModel::h));
    k.push_back(real_key("geometry.theta_max_rad", &RunConfig::model, &ShellModel::theta_max));
    k.push_back(real_key("material.E_Pa", &RunConfig::model, &ShellModel::E));
    k.push_back(real_key("material.nu", &RunConfig::model, &ShellModel::nu));
    k.push_back(count_key("mesh.n_nodes", &RunConfig::model, &ShellModel::n_nodes));
    k.push_back(real_key("mesh.apex_grading", &RunConfig::model, &ShellModel::apex_grading));
    k.push_back({"mesh.boundary",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "clamped")
                     c.model.boundary = BoundaryCondition::clamped;
                   else if (v == "pinned")
                     c.model.boundary = BoundaryCondition::pinned;
                   else
                     throw ConfigError("mesh.boundary", "expected clamped or pinned, got '" + v + "'");
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.model.boundary)); }});
    k.push_back(real_key("friction.mu", &RunConfig::contact, &ContactParams::mu));
    k.push_back(real_key("contact.k_n_Pa_per_m", &RunConfig::contact, &ContactParams::k_n));
    k.push_back(real_key("contact.k_t_Pa_per_m", &RunConfig::contact, &ContactParams::k_t));
    k.push_back(real_key("contact.g_tol_m", &RunConfig::contact, &ContactParams::g_tol));
    k.push_back(real_key("contact.cone_tol_Pa", &RunConfig::contact, &ContactParams::cone_tol));
    k.push_back(real_key("schedule.d_max_m", &RunConfig::schedule, &Schedule::d_max));
    k.push_back(count_key("schedule.n_steps_load", &RunConfig::schedule, &Schedule::n_steps_load));
    k.push_back(
        count_key("schedule.n_steps_unload", &RunConfig::schedule, &Schedule::n_steps_unload));
    k.push_back({"schedule.mode",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "plate")
                     c.schedule.mode = LoadingMode::plate;
                   else if (v == "point")
                     c.schedule.mode = LoadingMode::point;
                   else
                     throw ConfigError("schedule.mode", "expected plate or point, got '" + v + "'");
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.schedule.mode)); }});
    k.push_back({"schedule.unload",
                 [](RunConfig& c, const std::string& v) {
                   c.schedule.unload = detail::parse_bool("schedule.unload", v);
                 },
                 [](const RunConfig& c) { return std::string(c.schedule.unload ? "true" : "false"); }});
    k.push_back(real_key("solver.residual_tol_N", &RunConfig::solver, &SolverParams::residual_tol));
    k.push_back(count_key("solver.max_newton", &RunConfig::solver, &SolverParams::max_newton));
    k.push_back(real_key("solver.backtrack", &RunConfig::solver, &SolverParams::backtrack));
    k.push_back(real_key("solver.armijo", &RunConfig::solver, &SolverParams::armijo));
    k.push_back(real_key("solver.min_substep", &RunConfig::solver, &SolverParams::min_substep));
    k.push_back(real_key("solver.stabilization", &RunConfig::solver, &SolverParams::stabilization));
    k.push_back(count_key("solver.stabilized_newton_factor", &RunConfig::solver,
                          &SolverParams::stabilized_newton_factor));
    k.push_back(count_key("solver.max_lag_iterations", &RunConfig::solver,
                          &SolverParams::max_lag_iterations));
    k.push_back(
        real_key("solver.energy_audit_tol", &RunConfig::solver, &SolverParams::energy_audit_tol));
    k.push_back(real_key("solver.p_tol", &RunConfig::solver, &SolverParams::p_tol));
    k.push_back({"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                 [](const RunConfig& c) { return c.output_dir; }});
    k.push_back({"output.snapshot_steps",
                 [](RunConfig& c, const std::string& v) {
                   c.snapshot_steps = detail::parse_step_list("output.snapshot_steps", v);
                 },
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.snapshot_steps.size(); ++i)
                     s += (i ? "," : "") + std::to_string(c.snapshot_steps[i]);
                   return s;
                 }});
    k.push_back({"run.seed",
                 [](RunConfig& c, const std::string& v) { c.seed = detail::parse_unsigned("run.seed", v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    return k;
  }();
  return keys;
}

/// Raised by parse_config; carries the 1-based line of the offending key
/// (0 when the violated bound comes from a default).
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(const ConfigError& e, std::size_t line)
      : ConfigError(e.key(), with_line(e, line)), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  static std::string with_line(const ConfigError& e, std::size_t line) {
    const std::string msg = std::string(e.what()).substr(e.key().size() + 2);
    return line ? "line " + std::to_string(line) + ": " + msg : msg;
  }
  std::size_t line_;
};

/// Geometry and material keys are applied first so derived defaults follow
/// them; later keys then override those defaults.
inline RunConfig parse_config(std::string_view text) {
  const auto& keys = config_keys();
  std::map<std::string, std::pair<std::string, std::size_t>> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(ConfigError(line, "expected 'section.key = value'"), line_no);
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const ConfigKey& k) { return k.name == key; });
    if (!known) throw ConfigParseError(ConfigError(key, "unknown key"), line_no);
    if (entries.count(key))
      throw ConfigParseError(
          ConfigError(key, "duplicate key (first set on line " +
                               std::to_string(entries[key].second) + ")"),
          line_no);
    entries[key] = {value, line_no};
  }

  RunConfig c;
  std::set<std::string> explicit_keys;
  auto apply = [&](bool primary) {
    for (const auto& k : keys) {
      const bool is_primary = k.name.starts_with("geometry.") || k.name.starts_with("material.");
      if (is_primary != primary) continue;
      const auto it = entries.find(k.name);
      if (it == entries.end()) continue;
      try {
        k.set(c, it->second.first);
      } catch (const ConfigError& e) {
        throw ConfigParseError(e, it->second.second);
      }
      explicit_keys.insert(k.name);
    }
  };
  apply(true);
  c.resolve_derived({});
  apply(false);
  c.resolve_derived(explicit_keys);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    const auto it = entries.find(e.key());
    throw ConfigParseError(e, it == entries.end() ? 0 : it->second.second);
  }
  return c;
}

/// Resolved value of every key, in echo order.
inline std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : config_keys()) out.emplace_back(k.name, k.get(c));
  return out;
}

}  // namespace shellcontact
