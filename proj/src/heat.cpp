#include "geoflow/heat.hpp"

#include <algorithm>
#include <cmath>

#include "geoflow/error.hpp"

namespace geoflow {
namespace {

void require_positive(const ScalarField& f, const char* what) {
  if (!(f.min() > 0.0)) throw Error(ErrorKind::Positivity, std::string(what) + " requires u > 0 everywhere");
}

double grad_sq4(const ScalarField& f, std::size_t i, std::size_t j) {
  const double ux = f.dx4(i, j);
  const double uy = f.dim() == 2 ? f.dy4(i, j) : 0.0;
  return ux * ux + uy * uy;
}

ScalarField average(const ScalarField& a, const ScalarField& b) {
  ScalarField mid = a;
  auto out = mid.periodic_mut();
  const auto bv = b.periodic();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (out[k] + bv[k]);
  return mid;
}

}  // namespace

double heat_max_dt(const ScalarField& field) {
  const double h2 = field.h() * field.h();
  return field.dim() == 1 ? 0.25 * h2 : 0.125 * h2;
}

HeatState step_heat(const HeatState& state, double dt) {
  const double limit = heat_max_dt(state.field);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorKind::StepSize, "dt=" + format_double(dt) + " exceeds heat CFL limit " + format_double(limit));
  }
  HeatState next{state.field, state.time + dt};
  auto out = next.field.periodic_mut();
  const std::size_t nx = state.field.nx();
  for (std::size_t j = 0; j < state.field.ny(); ++j) {
    for (std::size_t i = 0; i < nx; ++i) out[j * nx + i] += dt * state.field.lap(i, j);
  }
  return next;
}

HeatFunctionals functionals(const HeatState& state, bool with_information) {
  const ScalarField& f = state.field;
  if (with_information) require_positive(f, "entropy/fisher");
  HeatFunctionals r;
  for (std::size_t j = 0; j < f.ny(); ++j) {
    for (std::size_t i = 0; i < f.nx(); ++i) {
      const double u = f.at(i, j);
      const double g2 = grad_sq4(f, i, j);
      r.l2 += u * u;
      r.energy += g2;
      if (with_information) {
        r.entropy += u * std::log(u);
        r.fisher += g2 / u;
      }
    }
  }
  const double c = f.cell();
  r.l2 *= c;
  r.energy *= c;
  r.entropy *= c;
  r.fisher *= c;
  return r;
}

double fisher_dissipation(const ScalarField& f) {
  require_positive(f, "fisher dissipation");
  double sum = 0.0;
  for (std::size_t j = 0; j < f.ny(); ++j) {
    for (std::size_t i = 0; i < f.nx(); ++i) {
      const double l = f.lap4(i, j);
      sum += l * l / f.at(i, j);
    }
  }
  return 2.0 * sum * f.cell();
}

double fisher_dissipation_residual(const HeatState& prev, const HeatState& next) {
  const double dt = next.time - prev.time;
  if (!(dt > 0.0)) throw Error(ErrorKind::Contract, "fisher_dissipation_residual needs increasing time");
  const double rate = (functionals(next).fisher - functionals(prev).fisher) / dt;
  const double diss = fisher_dissipation(average(prev.field, next.field));
  const double scale = std::max(std::abs(rate), diss);
  if (scale < 1e-300) return 0.0;
  if (diss == 0.0) return 1.0;
  return std::abs(rate + diss) / diss;
}

double fisher_rate(const ScalarField& f) {
  require_positive(f, "fisher rate");
  double sum = 0.0;
  for (std::size_t j = 0; j < f.ny(); ++j) {
    for (std::size_t i = 0; i < f.nx(); ++i) {
      const double u = f.at(i, j), l = f.lap4(i, j);
      sum += -2.0 * l * l / u + grad_sq4(f, i, j) * l / (u * u);
    }
  }
  return sum * f.cell();
}

double fisher_rate_residual(const HeatState& prev, const HeatState& next) {
  const double dt = next.time - prev.time;
  if (!(dt > 0.0)) throw Error(ErrorKind::Contract, "fisher_rate_residual needs increasing time");
  const double rate = (functionals(next).fisher - functionals(prev).fisher) / dt;
  const double exact = fisher_rate(average(prev.field, next.field));
  if (std::max(std::abs(rate), std::abs(exact)) < 1e-300) return 0.0;
  return std::abs(rate - exact) / std::abs(exact);
}

double li_yau_min(const HeatState& state, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::Domain, "Li-Yau quantity needs t > 0");
  const ScalarField& f = state.field;
  require_positive(f, "Li-Yau quantity");
  const double d = static_cast<double>(f.dim());
  double m = INFINITY;
  for (std::size_t j = 0; j < f.ny(); ++j) {
    for (std::size_t i = 0; i < f.nx(); ++i) {
      const double u = f.at(i, j);
      m = std::min(m, f.lap4(i, j) - grad_sq4(f, i, j) / u + d * u / (2.0 * t));
    }
  }
  return m;
}

double smoothing_bound(std::span<const HeatState> states, int k) {
  if (k != 1 && k != 2) throw Error(ErrorKind::Domain, "smoothing_bound supports k = 1 or 2");
  double sup = 0.0;
  for (const HeatState& s : states) {
    if (!(s.time > 0.0)) continue;
    const ScalarField& f = s.field;
    double norm_inf = 0.0;
    for (std::size_t j = 0; j < f.ny(); ++j) {
      for (std::size_t i = 0; i < f.nx(); ++i) {
        double v;
        if (k == 1) {
          const double ux = f.dx(i, j), uy = f.dim() == 2 ? f.dy(i, j) : 0.0;
          v = std::hypot(ux, uy);
        } else if (f.dim() == 1) {
          v = std::abs(f.dxx(i));
        } else {
          // Frobenius norm of the Hessian.
          const double xy = f.dxy(i, j);
          v = std::sqrt(f.dxx(i, j) * f.dxx(i, j) + 2.0 * xy * xy + f.dyy(i, j) * f.dyy(i, j));
        }
        norm_inf = std::max(norm_inf, v);
      }
    }
    sup = std::max(sup, std::pow(s.time, k) * norm_inf * norm_inf);
  }
  return sup;
}

const std::vector<std::string>& heat_series_columns() {
  static const std::vector<std::string> cols = {"l2", "energy", "entropy", "fisher", "liyau_min"};
  return cols;
}

namespace {

std::vector<double> heat_row(const HeatState& s, bool information) {
  const auto f = functionals(s, information);
  std::vector<double> row{f.l2, f.energy, kMissing, kMissing, kMissing};
  if (information) {
    row[2] = f.entropy;
    row[3] = f.fisher;
    if (s.time > 0.0) row[4] = li_yau_min(s, s.time);
  }
  return row;
}

}  // namespace

HeatRunResult run_heat(const HeatRunConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw Error(ErrorKind::Config, "t_end must be positive");
  if (!(cfg.cfl_factor > 0.0 && cfg.cfl_factor <= 1.0)) throw Error(ErrorKind::Config, "cfl_factor must be in (0, 1]");
  HeatRunResult result{DiagnosticSeries(heat_series_columns()), HeatState{cfg.initial, 0.0}, {}, 0};
  HeatState state{cfg.initial, 0.0};
  const std::size_t every = std::max<std::size_t>(cfg.sample_every, 1);
  const double dt = cfg.cfl_factor * heat_max_dt(state.field);
  result.series.append(0.0, heat_row(state, cfg.information));
  if (cfg.keep_states) result.samples.push_back(state);
  while (state.time < cfg.t_end) {
    const double remaining = cfg.t_end - state.time;
    const bool last = dt >= remaining;
    state = step_heat(state, last ? remaining : dt);
    if (last) state.time = cfg.t_end;
    ++result.steps;
    if (result.steps % every == 0 || last) {
      result.series.append(state.time, heat_row(state, cfg.information));
      if (cfg.keep_states) result.samples.push_back(state);
    }
    if (last) break;
  }
  result.final_state = state;
  return result;
}

}  // namespace geoflow
