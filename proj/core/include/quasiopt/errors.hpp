#pragma once
/// @file errors.hpp
/// @brief Exception hierarchy. Every library failure derives from quasiopt::Error.

#include <stdexcept>
#include <string>
#include <vector>

namespace quasiopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user callback returned NaN or Inf. `input` holds the primal point.
class NonFiniteEvaluation : public Error {
 public:
  NonFiniteEvaluation(const std::string& what, std::vector<double> input)
      : Error(what), input_(std::move(input)) {}
  const std::vector<double>& input() const { return input_; }

 private:
  std::vector<double> input_;
};

/// The frame X(q) is numerically singular (condition number above 1e12).
class SingularFrame : public Error {
 public:
  SingularFrame(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// The y-Hessian of the reduced Lagrangian is singular.
class SingularMassMatrix : public Error {
 public:
  using Error::Error;
};

/// The unactuated block of the y-Hessian is singular, so the constraints
/// cannot be solved for the unactuated accelerations.
class SingularHessianBlock : public Error {
 public:
  using Error::Error;
};

/// det R is below tolerance: W1 is not symplectic at this state.
class RegularityFailure : public Error {
 public:
  RegularityFailure(const std::string& what, double det) : Error(what), det_(det) {}
  double det() const { return det_; }

 private:
  double det_;
};

class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

/// A derivative was requested deeper than the generic-scalar tower allows,
/// or a double-only model was asked for a dual evaluation.
class DifferentiationUnavailable : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace quasiopt
