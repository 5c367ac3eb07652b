#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geoflow {

enum class ErrorKind {
  DegenerateGeometry,
  StepSize,
  ExtinctionImminent,
  BlowUp,
  Domain,
  Positivity,
  Matching,
  Bias,
  Singular,
  NonConvergence,
  Contract,
  Quadrature,
  Config,
};

const char* to_string(ErrorKind kind);

/// Base class for every error raised by the library. The kind is what callers
/// dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Iterative solver gave up. Carries the best iterate and the residual trace.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> best,
                      std::vector<double> residual_history)
      : Error(ErrorKind::NonConvergence, what),
        best_(std::move(best)),
        history_(std::move(residual_history)) {}

  const std::vector<double>& best_iterate() const { return best_; }
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> best_;
  std::vector<double> history_;
};

/// Estimator is not unbiased at the queried parameter.
class BiasError : public Error {
 public:
  BiasError(const std::string& what, std::vector<double> bias)
      : Error(ErrorKind::Bias, what), bias_(std::move(bias)) {}
  const std::vector<double>& bias() const { return bias_; }

 private:
  std::vector<double> bias_;
};

}  // namespace geoflow
