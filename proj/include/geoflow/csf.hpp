#pragma once

// Curve shortening flow.
//
// Nodes move by dX/dt = X_uu / |X_u|^2 on the node-index parameter, which has
// the same geometric trace as dX/dt = -kappa N but is strictly parabolic.
// Arc-length resampling every few steps keeps the tangential drift bounded.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoflow/curve.hpp"
#include "geoflow/series.hpp"

namespace geoflow {

struct FlowState {
  ClosedCurve curve;
  double time = 0.0;
  std::size_t step_index = 0;
};

struct CsfPolicy {
  double cfl_factor = 0.2;
  std::size_t resample_every = 10;
};

/// Largest admissible step for the current curve.
double csf_max_dt(const ClosedCurve& curve, const CsfPolicy& policy = {});

/// One explicit Euler step followed, every `resample_every` steps, by
/// arc-length resampling. Throws step-size on CFL violation and
/// extinction-imminent when sup|kappa| * min edge exceeds 1.
FlowState step(const FlowState& state, double dt, const CsfPolicy& policy = {});

/// Same update without the periodic resampling.
FlowState advance(const FlowState& state, double dt, const CsfPolicy& policy = {});

/// |(L(next) - L(prev))/dt + int kappa^2 ds| / int kappa^2 ds with the
/// dissipation taken on the nodewise midpoint curve.
double length_rate_residual(const FlowState& prev, const FlowState& next);

/// Relative L2 mismatch between d(kappa)/dt and kappa_ss + kappa^3. Nodes of
/// `prev` are matched to `next` along the previous normal. Throws matching
/// when the normal ray misses `next` within the local feature size.
double curvature_evolution_residual(const FlowState& prev, const FlowState& next);

/// sup over node pairs of Z = (L/d) sin(pi l / L): d the chord, l the shorter
/// arc between the nodes. Equals pi on a round circle. Above 512 nodes only
/// every 4th node participates.
double isoperimetric_sup(const ClosedCurve& curve);

/// Gaussian-weighted length int (t0-t)^{-1/2} exp(-|x-x0|^2 / 4(t0-t)) ds.
double huisken_weight(const ClosedCurve& curve, Vec2 x0, double t0, double t);

/// Minimum node-to-segment distance between two curves.
double min_distance(const ClosedCurve& a, const ClosedCurve& b);

/// Column layout of the CSV written for a CSF run.
const std::vector<std::string>& csf_series_columns();

struct HuiskenCenter {
  Vec2 x0;
  double t0 = 0.0;
};

struct CsfRunConfig {
  explicit CsfRunConfig(ClosedCurve init) : initial(std::move(init)) {}
  ClosedCurve initial;
  double t_end = 1.0;
  CsfPolicy policy{};
  std::size_t sample_every = 50;
  std::optional<HuiskenCenter> huisken;
  /// Second curve evolved with the same steps; enables the min_distance column.
  std::optional<ClosedCurve> partner;
  /// Compute the probe-step residual columns at each sample.
  bool residuals = true;
};

struct CsfRunResult {
  DiagnosticSeries series;
  FlowState final_state;
  std::optional<FlowState> final_partner;
  bool extinct = false;
  /// Midpoint of the last step interval when `extinct`, otherwise the end time.
  double end_time = 0.0;
  std::size_t steps = 0;
};

/// Integrates until t_end or extinction (length below 1% of the initial
/// length, or the curvature-overflow signal).
CsfRunResult run(const CsfRunConfig& config);

}  // namespace geoflow
