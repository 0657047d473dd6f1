#pragma once

#include <stdexcept>
#include <string>

namespace firpriv {

/// Base of every exception thrown by the library. The CLI maps any of these
/// to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent vector/matrix sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range (epsilon <= 0, beta outside (0,1), ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A linear system too ill-conditioned to solve reliably.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, double condition)
      : Error(what + " (condition estimate " + std::to_string(condition) + ")"),
        condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Variance budget not larger than the sensor noise variance.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient convolution matrix in the input-channel design.
class RankError : public Error {
 public:
  using Error::Error;
};

/// Instance too large for an exhaustive/numerical-quadrature routine.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration; the message names the line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace firpriv
