#pragma once

#include <stdexcept>
#include <string>

namespace spinsurf {

// Bad user input: malformed config files, invalid parameter combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite amplitudes, eigensolver breakdown.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integration aborted; carries the simulation time at which it failed.
class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& msg, double t_fail)
      : NumericError(msg), time_of_failure_(t_fail) {}

  double time_of_failure() const { return time_of_failure_; }

 private:
  double time_of_failure_;
};

// Request exceeds a built-in size/budget limit.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spinsurf
