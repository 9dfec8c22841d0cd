#pragma once

#include <stdexcept>
#include <string>

namespace fsi {

/// Invalid arguments, violated preconditions, malformed input files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures that happen while fitting (as opposed to bad input).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The local design around a query point carries no usable spread:
/// the bandwidth is too small or the query point is isolated.
class DegenerateWindow : public NumericalError {
 public:
  explicit DegenerateWindow(const std::string& what, long observation = -1)
      : NumericalError(what), observation_(observation) {}

  /// Index of the observation whose local fit failed, or -1 if not tied to one.
  long observation() const noexcept { return observation_; }

 private:
  long observation_;
};

class SolverFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Every candidate (theta, h) pair or every bandwidth was infeasible.
class FitFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fsi
