#pragma once

#include <stdexcept>
#include <string>

namespace oamdm {

/// Post-selection amplitude is (numerically) zero; the weak value is undefined.
class DegeneratePostselectionError : public std::runtime_error {
 public:
  DegeneratePostselectionError(int ell, const std::string& what)
      : std::runtime_error(what), ell_(ell) {}
  int ell() const { return ell_; }

 private:
  int ell_;
};

/// Count record has no usable signal after nuisance subtraction.
class InsufficientSignalError : public std::runtime_error {
 public:
  InsufficientSignalError(int ell, const std::string& what)
      : std::runtime_error(what), ell_(ell) {}
  int ell() const { return ell_; }

 private:
  int ell_;
};

/// Grid cannot resolve the requested field or propagation step.
class SamplingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fit did not converge; carries the last iterate for diagnostics.
class FitFailureError : public std::runtime_error {
 public:
  FitFailureError(const std::string& what, double last_value)
      : std::runtime_error(what), last_value_(last_value) {}
  double last_value() const { return last_value_; }

 private:
  double last_value_;
};

/// Invalid or unknown configuration entry; carries the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : std::runtime_error(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

class MissingInputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace oamdm
