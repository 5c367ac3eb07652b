#pragma once

// Periodic heat flow u_t = Lap u and its monotone functionals.

#include <span>
#include <utility>
#include <vector>

#include "geoflow/field.hpp"
#include "geoflow/series.hpp"

namespace geoflow {

struct HeatState {
  ScalarField field;
  double time = 0.0;
};

/// dt limit: 0.25 h^2 in 1D, 0.125 h^2 in 2D.
double heat_max_dt(const ScalarField& field);

/// Explicit Euler with the 3-/5-point Laplacian. Conservative: the grid sum
/// of u is unchanged up to rounding.
HeatState step_heat(const HeatState& state, double dt);

struct HeatFunctionals {
  double l2 = 0.0;       ///< int u^2
  double energy = 0.0;   ///< int |Du|^2
  double entropy = 0.0;  ///< int u log u
  double fisher = 0.0;   ///< int |Du|^2 / u
};

/// All four functionals by grid quadrature with fourth-order gradients.
/// Entropy and Fisher information need u > 0 (positivity error otherwise);
/// pass `with_information = false` to skip them.
HeatFunctionals functionals(const HeatState& state, bool with_information = true);

/// 2 int (Lap u)^2 / u.
double fisher_dissipation(const ScalarField& field);

/// |(I(next) - I(prev))/dt + 2 int (Lap u)^2/u| / (2 int (Lap u)^2/u), the
/// dissipation evaluated on the averaged field. Zero when both sides vanish.
double fisher_dissipation_residual(const HeatState& prev, const HeatState& next);

/// Exact Fisher information rate under the heat flow,
/// dI/dt = -2 int (Lap u)^2 / u + int |Du|^2 Lap u / u^2.
double fisher_rate(const ScalarField& field);

/// |(I(next) - I(prev))/dt - fisher_rate| / |fisher_rate| on the averaged field.
double fisher_rate_residual(const HeatState& prev, const HeatState& next);

/// Grid minimum of Lap u - |Du|^2/u + d u / (2t), d the grid dimension.
double li_yau_min(const HeatState& state, double t);

/// sup over the states with t > 0 of t^k ||D^k u||_inf^2, k in {1, 2}.
double smoothing_bound(std::span<const HeatState> states, int k);

const std::vector<std::string>& heat_series_columns();

struct HeatRunConfig {
  explicit HeatRunConfig(ScalarField init) : initial(std::move(init)) {}
  ScalarField initial;
  double t_end = 0.1;
  double cfl_factor = 1.0;  ///< fraction of heat_max_dt
  std::size_t sample_every = 10;
  bool information = true;  ///< entropy, fisher and Li-Yau columns
  bool keep_states = false;
};

struct HeatRunResult {
  DiagnosticSeries series;
  HeatState final_state;
  std::vector<HeatState> samples;  ///< filled when keep_states
  std::size_t steps = 0;
};

HeatRunResult run_heat(const HeatRunConfig& config);

}  // namespace geoflow
