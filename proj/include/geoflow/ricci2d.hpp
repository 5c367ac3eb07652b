#pragma once

// Two-dimensional Ricci flow in conformal gauge over the flat unit torus.
//
// The metric is g = e^{2u} g0 with g0 flat (K0 = 0), so the flow reduces to
// u_t = e^{-2u} Lap0 u. The average curvature r vanishes on the torus, so the
// normalised and unnormalised flows coincide.

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "geoflow/field.hpp"
#include "geoflow/series.hpp"

namespace geoflow {

struct ConformalMetric {
  ScalarField u;  ///< log conformal factor on a 2D periodic grid
};

/// Flat torus of unit period with conformal factor from `fn`.
ConformalMetric make_conformal_metric(std::size_t n, const std::function<double(double, double)>& fn);

/// R = e^{-2u} (R0 - 2 Lap0 u) with R0 = 0 and the 5-point Laplacian.
ScalarField scalar_curvature(const ConformalMetric& metric);

/// 0.2 h^2 min e^{2u}.
double ricci_max_dt(const ConformalMetric& metric);

/// Pointwise update shared by the stepper: u + dt e^{-2u} lap.
inline double conformal_update(double u, double lap, double dt) { return u + dt * std::exp(-2.0 * u) * lap; }

/// One explicit step. Throws step-size on CFL violation, blow-up on
/// non-finite output.
ConformalMetric step_ricci(const ConformalMetric& metric, double dt);

/// int R dmu(g); zero on the torus by Gauss-Bonnet.
double total_curvature_measure(const ConformalMetric& metric);

/// int dmu(g) = int e^{2u} dA0.
double metric_area(const ConformalMetric& metric);

/// Solution R0 / (1 - R0 t) of dR/dt = R^2. Throws domain once 1 - R0 t <= 0.
double curvature_ode_oracle(double r0, double t);

/// dR/dt - |DR|^2/R + R/t along the spatially constant solution; equals
/// R^2 + R/t.
double ricci_harnack_ode(double r0, double t);

/// int R log R dmu. Positivity error unless R > 0 everywhere.
double hamilton_entropy(const ConformalMetric& metric);
/// Same integral for a supplied curvature field, e.g. from a curved background.
double hamilton_entropy(const ConformalMetric& metric, const ScalarField& curvature);

/// int (R + |Df|_g^2) e^{-f} dmu(g) with |Df|_g^2 = e^{-2u} |D0 f|^2.
double perelman_F(const ConformalMetric& metric, const ScalarField& f);

const std::vector<std::string>& ricci_series_columns();

struct RicciRunConfig {
  explicit RicciRunConfig(ConformalMetric init) : initial(std::move(init)) {}
  ConformalMetric initial;
  double t_end = 1.0;
  double cfl_factor = 1.0;  ///< fraction of ricci_max_dt
  std::size_t sample_every = 100;
  std::optional<ScalarField> perelman_f;  ///< f for the perelman_F column, default 0
};

struct RicciRunResult {
  DiagnosticSeries series;
  ConformalMetric final_metric;
  std::size_t steps = 0;
};

RicciRunResult run_ricci(const RicciRunConfig& config);

}  // namespace geoflow
