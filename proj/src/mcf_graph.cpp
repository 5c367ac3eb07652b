#include "geoflow/mcf_graph.hpp"

#include <cmath>

#include "geoflow/error.hpp"
#include "geoflow/series.hpp"

namespace geoflow {

ScalarField step_graph_mcf(const ScalarField& field, double dt) {
  const double h = field.h();
  const double limit = kGraphMcfCfl * h * h;
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorKind::StepSize, "dt=" + format_double(dt) + " exceeds graph MCF limit " + format_double(limit));
  }
  ScalarField next = field;
  auto out = next.periodic_mut();
  if (field.dim() == 1) {
    for (std::size_t i = 0; i < field.nx(); ++i) {
      const double ux = field.dx(i);
      out[i] += dt * field.dxx(i) / (1.0 + ux * ux);
    }
  } else {
    const std::size_t n = field.nx();
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double ux = field.dx(i, j), uy = field.dy(i, j);
        const double speed =
            ((1.0 + uy * uy) * field.dxx(i, j) - 2.0 * ux * uy * field.dxy(i, j) + (1.0 + ux * ux) * field.dyy(i, j)) /
            (1.0 + ux * ux + uy * uy);
        out[j * n + i] += dt * speed;
      }
    }
  }
  next.check_finite();
  return next;
}

double graph_area(const ScalarField& field) {
  double sum = 0.0;
  for (std::size_t j = 0; j < field.ny(); ++j) {
    for (std::size_t i = 0; i < field.nx(); ++i) {
      const double ux = field.dx4(i, j);
      const double uy = field.dim() == 2 ? field.dy4(i, j) : 0.0;
      sum += std::sqrt(1.0 + ux * ux + uy * uy);
    }
  }
  return sum * field.cell();
}

double sphere_extinction_time(double r0, int n) {
  if (!(r0 > 0.0) || n < 1) throw Error(ErrorKind::Domain, "sphere oracle needs r0 > 0 and n >= 1");
  return r0 * r0 / (2.0 * n);
}

double sphere_radius_oracle(double r0, int n, double t) {
  if (!(t < sphere_extinction_time(r0, n))) {
    throw Error(ErrorKind::Domain, "t=" + format_double(t) + " is at or after extinction");
  }
  return std::sqrt(r0 * r0 - 2.0 * n * t);
}

}  // namespace geoflow
