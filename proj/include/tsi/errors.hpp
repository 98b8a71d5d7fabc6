#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tsi {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the problem's domain (e.g. the CPD potential singularity).
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Step budget of a reference solver exhausted.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration hit its cap. Carries the residual history.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations,
                   std::vector<double> trace, long step = -1)
      : Error(what),
        residual_(residual),
        iterations_(iterations),
        trace_(std::move(trace)),
        step_(step) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }
  const std::vector<double>& residual_trace() const { return trace_; }
  long step() const { return step_; }

 private:
  double residual_;
  int iterations_;
  std::vector<double> trace_;
  long step_;
};

/// Non-finite iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iterations, long step = -1)
      : Error(what), iterations_(iterations), step_(step) {}

  int iterations() const { return iterations_; }
  long step() const { return step_; }

 private:
  int iterations_;
  long step_;
};

}  // namespace tsi
