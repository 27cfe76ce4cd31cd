#pragma once

#include <stdexcept>
#include <string>

namespace conepos {

/// Raised for malformed input: bad dimensions, invalid domains, out-of-range
/// parameters. The CLI maps this to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot deliver a result at the requested
/// accuracy (non-convergence, singular metric). The CLI maps this to exit
/// code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The metric is too close to singular for the numerical routines
/// (condition number above 1e12).
class DegenerateMetric : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace conepos
