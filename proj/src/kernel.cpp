#include "geoflow/kernel.hpp"

#include <cmath>
#include <numbers>

#include "geoflow/error.hpp"
#include "geoflow/quadrature.hpp"

namespace geoflow {
namespace {

constexpr double kDeltaHalfWidth = 10.0;   // in units of 1/sqrt(a)
constexpr double kKernelHalfWidth = 8.0;   // in units of k; exp(-64) ~ 1.6e-28

}  // namespace

double delta_claim1_lhs(const std::function<double(double)>& sigma, double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::Domain, "delta_claim1_lhs needs a > 0");
  // Substitute u = sqrt(a) x: the integral becomes
  // (4a / sqrt(pi)) int u^2 exp(-u^2) sigma(u / sqrt(a)) du.
  const double root = std::sqrt(a);
  auto integrand = [&](double u) { return u * u * std::exp(-u * u) * sigma(u / root); };
  const double scale = 4.0 * a / std::sqrt(std::numbers::pi);
  const auto r = integrate(integrand, -kDeltaHalfWidth, kDeltaHalfWidth, 1e-10 / scale, 1e-13);
  return scale * r.value;
}

double kernel_expected(const std::function<double(double)>& f, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::Domain, "kernel width must be positive");
  auto integrand = [&](double v) { return std::exp(-v * v) * f(k * v); };
  const auto r = integrate(integrand, -kKernelHalfWidth, kKernelHalfWidth, 1e-13, 1e-14);
  return r.value / std::sqrt(std::numbers::pi);
}

double kernel_expansion(double f0, double f2_0, double k) { return f0 + 0.25 * k * k * f2_0; }

}  // namespace geoflow
