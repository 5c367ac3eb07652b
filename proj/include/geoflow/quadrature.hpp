#pragma once

#include <functional>

namespace geoflow {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b]. Bisects
/// the interval with the largest error estimate until the total estimate is
/// at most max(abs_tol, rel_tol * |value|). Throws quadrature on exhausting
/// `max_intervals`.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10,
                           double rel_tol = 0.0, int max_intervals = 4000);

}  // namespace geoflow
