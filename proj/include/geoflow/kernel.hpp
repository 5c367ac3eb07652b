#pragma once

// Gaussian approximations of the delta distribution.

#include <functional>

namespace geoflow {

/// int (f_a')^2 / f_a * sigma dx for f_a(x) = sqrt(a/pi) exp(-a x^2), i.e.
/// int 4 a^2 x^2 sqrt(a/pi) exp(-a x^2) sigma(x) dx over |x| <= 10/sqrt(a).
/// Requires a > 0.
double delta_claim1_lhs(const std::function<double(double)>& sigma, double a);

/// int (1 / (k sqrt(pi))) exp(-(x/k)^2) f(x) dx for k > 0.
double kernel_expected(const std::function<double(double)>& f, double k);

/// f(0) + (k/2)^2 f''(0), the delta-plus-second-derivative expansion.
double kernel_expansion(double f0, double f2_0, double k);

}  // namespace geoflow
