#include "geoflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "geoflow/error.hpp"
#include "geoflow/series.hpp"

namespace geoflow {
namespace {

// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss nodes.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double a, b, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = h * kXgk[k];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[k] * s;
    if (k % 2 == 1) gauss += kWg[k / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol,
                           int max_intervals) {
  std::priority_queue<Piece> heap;
  Piece first = gauss_kronrod(f, a, b);
  QuadratureResult result{first.value, first.error, 15};
  heap.push(first);
  while (result.error > std::max(abs_tol, rel_tol * std::abs(result.value))) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      throw Error(ErrorKind::Quadrature, "adaptive quadrature did not converge, error estimate " +
                                             format_double(result.error));
    }
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Piece left = gauss_kronrod(f, worst.a, mid);
    const Piece right = gauss_kronrod(f, mid, worst.b);
    result.evaluations += 30;
    heap.push(left);
    heap.push(right);
    result.value += left.value + right.value - worst.value;
    result.error = std::max(0.0, result.error + left.error + right.error - worst.error);
  }
  // Final sum from the pieces, free of the running-update rounding.
  double value = 0.0, error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  result.value = value;
  result.error = error;
  return result;
}

}  // namespace geoflow
