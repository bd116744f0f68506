#pragma once

#include <stdexcept>
#include <string>

namespace cfsec {

/// Input outside an operation's documented domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown that corrupts a result (singular Gram matrix,
/// nonpositive MMSE denominator, failed Newton solve).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularGram : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The power-allocation constraints admit no point.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// More than one user was flagged as attacked.
class Ambiguous : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfsec
