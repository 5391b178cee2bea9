#pragma once

#include <stdexcept>
#include <string>

namespace dichotomy {

/// Invalid input, configuration or precondition. Maps to CLI exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures raised while a computation is running. Maps to exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// p(v) + q(v) vanished where the slow-manifold split needs it.
class DegenerateStateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, double last_good_t)
      : NumericalError(what), last_good_t_(last_good_t) {}
  double last_good_time() const noexcept { return last_good_t_; }

 private:
  double last_good_t_;
};

class PositivityError : public NumericalError {
 public:
  PositivityError(const std::string& what, double t) : NumericalError(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class NoConvergenceError : public NumericalError {
 public:
  NoConvergenceError(const std::string& what, double best_residual)
      : NumericalError(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class EigenSolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A bracket holds more than one crossing; the caller should retry with smaller steps.
class RefinementNeededError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class AlignmentError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dichotomy
