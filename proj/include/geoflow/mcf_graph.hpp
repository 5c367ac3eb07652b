#pragma once

// Mean curvature flow of periodic graphs, u_t = (delta_ij - u_i u_j / (1 + |Du|^2)) u_ij,
// plus the closed-form shrinking-sphere radius.

#include "geoflow/field.hpp"

namespace geoflow {

inline constexpr double kGraphMcfCfl = 0.2;

/// One explicit step with centered differences (9-point mixed derivative in
/// 2D). Throws step-size if dt > 0.2 h^2, blow-up on non-finite output.
ScalarField step_graph_mcf(const ScalarField& field, double dt);

/// int sqrt(1 + |Du|^2) over one period, fourth-order gradients.
double graph_area(const ScalarField& field);

/// Radius sqrt(r0^2 - 2 n t) of a round n-sphere under MCF. Throws domain at
/// or after the extinction time r0^2 / (2n).
double sphere_radius_oracle(double r0, int n, double t);

/// r0^2 / (2n).
double sphere_extinction_time(double r0, int n);

}  // namespace geoflow
