#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fbmarb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain (e.g. hurst not in (0,1)).
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// Two paths that must share a time grid do not.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A structural invariant of an input was violated (decreasing clock,
/// non-nested refinements, unsorted times).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A user-supplied function or derivative returned a non-finite value.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

class NumericOverflowError : public Error {
 public:
  NumericOverflowError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Two routes that are algebraically identical disagreed, or the spectral
/// embedding produced a negative eigenvalue.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed even after the jitter retries.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Aggregated configuration problems; every violated constraint is listed.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept {
    return problems_;
  }

 private:
  std::vector<std::string> problems_;
};

}  // namespace fbmarb
