#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shellcontact {

/// Invalid model, schedule or run parameters. `key` names the violated bound.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// A segment collapsed to zero length (or an equivalent singular geometry).
class DegenerateConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed inconsistent data (duplicate sweep values, overlapping
/// intervals, a trajectory without an unloading branch, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Equilibrium could not be reached at the minimum substep even with
/// stabilization.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(std::size_t step, double residual, const std::string& what)
      : std::runtime_error(what), step_(step), residual_(residual) {}
  std::size_t step() const { return step_; }
  double residual() const { return residual_; }

 private:
  std::size_t step_;
  double residual_;
};

}  // namespace shellcontact
