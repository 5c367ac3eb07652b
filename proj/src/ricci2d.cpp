#include "geoflow/ricci2d.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/error.hpp"

namespace geoflow {
namespace {

void require_2d(const ScalarField& f) {
  if (f.dim() != 2) throw Error(ErrorKind::Contract, "conformal metric needs a 2D field");
}

}  // namespace

ConformalMetric make_conformal_metric(std::size_t n, const std::function<double(double, double)>& fn) {
  return ConformalMetric{ScalarField::two_d(n, 1.0, fn)};
}

ScalarField scalar_curvature(const ConformalMetric& metric) {
  const ScalarField& u = metric.u;
  require_2d(u);
  ScalarField r = u;
  auto out = r.periodic_mut();
  const std::size_t n = u.nx();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) out[j * n + i] = -2.0 * std::exp(-2.0 * u.at(i, j)) * u.lap(i, j);
  }
  return r;
}

double ricci_max_dt(const ConformalMetric& metric) {
  const double h = metric.u.h();
  return 0.2 * h * h * std::exp(2.0 * metric.u.min());
}

ConformalMetric step_ricci(const ConformalMetric& metric, double dt) {
  require_2d(metric.u);
  const double limit = ricci_max_dt(metric);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorKind::StepSize, "dt=" + format_double(dt) + " exceeds Ricci CFL limit " + format_double(limit));
  }
  ConformalMetric next = metric;
  auto out = next.u.periodic_mut();
  const std::size_t n = metric.u.nx();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      out[j * n + i] = conformal_update(metric.u.at(i, j), metric.u.lap(i, j), dt);
    }
  }
  next.u.check_finite();
  return next;
}

double total_curvature_measure(const ConformalMetric& metric) {
  const ScalarField r = scalar_curvature(metric);
  const std::size_t n = metric.u.nx();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) sum += r.at(i, j) * std::exp(2.0 * metric.u.at(i, j));
  return sum * metric.u.cell();
}

double metric_area(const ConformalMetric& metric) {
  double sum = 0.0;
  for (double v : metric.u.periodic()) sum += std::exp(2.0 * v);
  return sum * metric.u.cell();
}

double curvature_ode_oracle(double r0, double t) {
  const double denom = 1.0 - r0 * t;
  if (!(denom > 0.0)) throw Error(ErrorKind::Domain, "curvature ODE blows up before t=" + format_double(t));
  return r0 / denom;
}

double ricci_harnack_ode(double r0, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::Domain, "Harnack quantity needs t > 0");
  const double r = curvature_ode_oracle(r0, t);
  // dR/dt = R^2 and |DR|^2 / R vanishes for spatially constant R.
  return r * r + r / t;
}

double hamilton_entropy(const ConformalMetric& metric) { return hamilton_entropy(metric, scalar_curvature(metric)); }

double hamilton_entropy(const ConformalMetric& metric, const ScalarField& curvature) {
  const std::size_t n = metric.u.nx();
  if (curvature.nx() != n || curvature.ny() != metric.u.ny())
    throw Error(ErrorKind::Contract, "curvature must live on the metric's grid");
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double rv = curvature.at(i, j);
      if (!(rv > 0.0)) throw Error(ErrorKind::Positivity, "hamilton_entropy needs R > 0 everywhere");
      sum += rv * std::log(rv) * std::exp(2.0 * metric.u.at(i, j));
    }
  }
  return sum * metric.u.cell();
}

double perelman_F(const ConformalMetric& metric, const ScalarField& f) {
  const ScalarField& u = metric.u;
  require_2d(f);
  if (f.nx() != u.nx() || f.h() != u.h()) throw Error(ErrorKind::Contract, "f must live on the metric's grid");
  const ScalarField r = scalar_curvature(metric);
  const std::size_t n = u.nx();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double e2u = std::exp(2.0 * u.at(i, j));
      const double fx = f.dx4(i, j), fy = f.dy4(i, j);
      const double grad_g = (fx * fx + fy * fy) / e2u;
      sum += (r.at(i, j) + grad_g) * std::exp(-f.at(i, j)) * e2u;
    }
  }
  return sum * u.cell();
}

const std::vector<std::string>& ricci_series_columns() {
  static const std::vector<std::string> cols = {"sup_abs_R", "min_R", "total_R_measure", "area", "perelman_F"};
  return cols;
}

namespace {

std::vector<double> ricci_row(const ConformalMetric& m, const ScalarField& f) {
  const ScalarField r = scalar_curvature(m);
  double sup = 0.0;
  for (double v : r.periodic()) sup = std::max(sup, std::abs(v));
  return {sup, r.min(), total_curvature_measure(m), metric_area(m), perelman_F(m, f)};
}

}  // namespace

RicciRunResult run_ricci(const RicciRunConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw Error(ErrorKind::Config, "t_end must be positive");
  if (!(cfg.cfl_factor > 0.0 && cfg.cfl_factor <= 1.0)) throw Error(ErrorKind::Config, "cfl_factor must be in (0, 1]");
  const ScalarField f = cfg.perelman_f ? *cfg.perelman_f : ScalarField::two_d(cfg.initial.u.nx(), cfg.initial.u.period(),
                                                                             [](double, double) { return 0.0; });
  RicciRunResult result{DiagnosticSeries(ricci_series_columns()), cfg.initial, 0};
  ConformalMetric m = cfg.initial;
  double t = 0.0;
  const std::size_t every = std::max<std::size_t>(cfg.sample_every, 1);
  result.series.append(t, ricci_row(m, f));
  while (t < cfg.t_end) {
    double dt = cfg.cfl_factor * ricci_max_dt(m);
    const bool last = dt >= cfg.t_end - t;
    if (last) dt = cfg.t_end - t;
    m = step_ricci(m, dt);
    t = last ? cfg.t_end : t + dt;
    ++result.steps;
    if (result.steps % every == 0 || last) result.series.append(t, ricci_row(m, f));
    if (last) break;
  }
  result.final_metric = m;
  return result;
}

}  // namespace geoflow
