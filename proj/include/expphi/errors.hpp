#pragma once

#include <stdexcept>
#include <string>

namespace expphi {

// Raised when a numerical safeguard trips: exponent overflow, explicit-step
// stiffness, or a degenerate importance-sampling ensemble.
class NumericGuardError : public std::runtime_error {
 public:
  explicit NumericGuardError(const std::string& what) : std::runtime_error(what) {}
};

class EssTooLowError : public NumericGuardError {
 public:
  EssTooLowError(const std::string& what, double ess) : NumericGuardError(what), ess_(ess) {}
  double ess() const { return ess_; }

 private:
  double ess_;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace expphi
