#pragma once
// Independent reference computations used by the unit tests.
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

/// Periodic or smooth integrand on [a, b] by Boost's adaptive Gauss-Kronrod.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

/// Integrand over the whole real line by Boost's tanh-sinh.
inline double integrate_line(const std::function<double(double)>& f) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

/// Perimeter of the ellipse x = a cos t, y = b sin t.
inline double ellipse_perimeter(double a, double b) {
  return integrate([=](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); }, 0.0, 2.0 * kPi);
}

/// Exact curvature of the ellipse at parameter t.
inline double ellipse_curvature(double a, double b, double t) {
  const double s = std::sin(t), c = std::cos(t);
  return a * b / std::pow(b * b * c * c + a * a * s * s, 1.5);
}

/// Spectral Laplacian of an n x n periodic grid with unit period, by a naive
/// separable discrete Fourier transform. Values are row-major, x fastest.
inline std::vector<double> spectral_laplacian(const std::vector<double>& v, std::size_t n) {
  using C = std::complex<double>;
  std::vector<C> w(v.begin(), v.end()), tmp(n * n);
  auto dft = [n](std::vector<C>& a, bool along_x, int sign) {
    std::vector<C> out(n * n);
    for (std::size_t line = 0; line < n; ++line)
      for (std::size_t k = 0; k < n; ++k) {
        C s = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          const double ang = sign * 2.0 * kPi * static_cast<double>(k * m % n) / static_cast<double>(n);
          const C val = along_x ? a[line * n + m] : a[m * n + line];
          s += val * C(std::cos(ang), std::sin(ang));
        }
        (along_x ? out[line * n + k] : out[k * n + line]) = s;
      }
    a.swap(out);
  };
  dft(w, true, -1);
  dft(w, false, -1);
  auto freq = [n](std::size_t k) {
    const long kk = static_cast<long>(k) <= static_cast<long>(n / 2) ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
    return 2.0 * kPi * static_cast<double>(kk);
  };
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) w[j * n + i] *= -(freq(i) * freq(i) + freq(j) * freq(j));
  dft(w, true, 1);
  dft(w, false, 1);
  std::vector<double> out(n * n);
  for (std::size_t k = 0; k < n * n; ++k) out[k] = w[k].real() / static_cast<double>(n * n);
  return out;
}

}  // namespace oracle
