#pragma once

#include <stdexcept>
#include <string>

namespace bcsgap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integrand or objective produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The supplied interval does not bracket a root.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// An iterative scalar method ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_iterate, double best_residual)
      : Error(what), best_iterate_(best_iterate), best_residual_(best_residual) {}

  double best_iterate() const noexcept { return best_iterate_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_iterate_;
  double best_residual_;
};

/// A scalar defining equation has no solution (e.g. coupling too weak).
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// The potential violates an admissibility hypothesis.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// An input violates an operation precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A derivative formula was evaluated where it divides by a vanishing gap.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The linearized kernel never reaches unit spectral radius.
class NoTransitionError : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration or data file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bcsgap
