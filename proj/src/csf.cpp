#include "geoflow/csf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geoflow/error.hpp"

namespace geoflow {
namespace {

constexpr double kExtinctionLengthFraction = 1e-2;
constexpr std::size_t kAllPairsLimit = 512;
constexpr std::size_t kPairStride = 4;

// kappa_ss + kappa^3 at every node, second differences in arc length.
std::vector<double> curvature_rhs(const ClosedCurve& curve, const CurveGeometry& g) {
  const std::size_t n = curve.size();
  const auto edges = edge_lengths(curve);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    const double ef = edges[i], eb = edges[im];
    const double kss =
        2.0 * ((g.curvature[ip] - g.curvature[i]) / ef - (g.curvature[i] - g.curvature[im]) / eb) / (ef + eb);
    rhs[i] = kss + g.curvature[i] * g.curvature[i] * g.curvature[i];
  }
  return rhs;
}

double dissipation(const ClosedCurve& curve) {
  const auto g = geometry(curve);
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) sum += g.curvature[i] * g.curvature[i] * g.arc_weight[i];
  return sum;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double f = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  f = std::clamp(f, 0.0, 1.0);
  return norm(p - (a + f * ab));
}

double one_sided_distance(const ClosedCurve& from, const ClosedCurve& to) {
  double best = INFINITY;
  const std::size_t m = to.size();
  for (const Vec2& p : from.nodes()) {
    for (std::size_t j = 0; j < m; ++j) best = std::min(best, point_segment_distance(p, to[j], to[(j + 1) % m]));
  }
  return best;
}

}  // namespace

double csf_max_dt(const ClosedCurve& curve, const CsfPolicy& policy) {
  const double e = min_edge_length(curve);
  return policy.cfl_factor * e * e;
}

FlowState advance(const FlowState& state, double dt, const CsfPolicy& policy) {
  const ClosedCurve& c = state.curve;
  const std::size_t n = c.size();
  const double limit = csf_max_dt(c, policy);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorKind::StepSize, "dt=" + format_double(dt) + " exceeds CFL limit " + format_double(limit));
  }
  const auto g = geometry(c);
  const double sup_kappa = std::abs(*std::max_element(g.curvature.begin(), g.curvature.end(),
                                                      [](double a, double b) { return std::abs(a) < std::abs(b); }));
  if (sup_kappa * min_edge_length(c) > 1.0) {
    throw Error(ErrorKind::ExtinctionImminent, "curvature overflow at t=" + format_double(state.time));
  }
  std::vector<Vec2> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long li = static_cast<long>(i);
    const Vec2 prev = c.at_cyclic(li - 1), here = c[i], fwd = c.at_cyclic(li + 1);
    const Vec2 d1 = 0.5 * (fwd - prev);
    const Vec2 d2 = fwd - 2.0 * here + prev;
    next[i] = here + (dt / dot(d1, d1)) * d2;
  }
  return FlowState{ClosedCurve(std::move(next)), state.time + dt, state.step_index + 1};
}

FlowState step(const FlowState& state, double dt, const CsfPolicy& policy) {
  FlowState next = advance(state, dt, policy);
  if (policy.resample_every > 0 && next.step_index % policy.resample_every == 0) {
    next.curve = resample_arclength(next.curve, next.curve.size());
  }
  return next;
}

double length_rate_residual(const FlowState& prev, const FlowState& next) {
  const double dt = next.time - prev.time;
  if (!(dt > 0.0) || prev.curve.size() != next.curve.size()) {
    throw Error(ErrorKind::Contract, "length_rate_residual needs consecutive states of one run");
  }
  std::vector<Vec2> mid(prev.curve.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (prev.curve[i] + next.curve[i]);
  const double diss = dissipation(ClosedCurve(std::move(mid)));
  const double rate = (length(next.curve) - length(prev.curve)) / dt;
  if (diss == 0.0) return 0.0;
  return std::abs(rate + diss) / diss;
}

double curvature_evolution_residual(const FlowState& prev, const FlowState& next) {
  const double dt = next.time - prev.time;
  if (!(dt > 0.0)) throw Error(ErrorKind::Contract, "curvature_evolution_residual needs increasing time");
  const ClosedCurve& a = prev.curve;
  const ClosedCurve& b = next.curve;
  const std::size_t n = a.size(), m = b.size();
  const auto ga = geometry(a);
  const auto gb = geometry(b);
  const auto rhs_a = curvature_rhs(a, ga);
  const auto rhs_b = curvature_rhs(b, gb);
  const auto edges_a = edge_lengths(a);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = a[i];
    const Vec2 dir = ga.normal[i];
    double feature = std::min(edges_a[i], edges_a[(i + n - 1) % n]);
    if (ga.curvature[i] != 0.0) feature = std::min(feature, 1.0 / std::abs(ga.curvature[i]));

    // Nearest crossing of the normal line through p with a segment of b.
    // Search near the corresponding index first, then everywhere.
    double best_tau = INFINITY;
    std::size_t best_seg = 0;
    double best_f = 0.0;
    auto scan = [&](std::size_t j) {
      const Vec2 s0 = b[j], s1 = b[(j + 1) % m];
      const Vec2 e = s1 - s0;
      const double denom = cross(dir, e);
      if (denom == 0.0) return;
      const Vec2 w = s0 - p;
      const double tau = cross(w, e) / denom;
      const double f = cross(w, dir) / denom;
      if (f < -1e-12 || f > 1.0 + 1e-12) return;
      if (std::abs(tau) < std::abs(best_tau)) {
        best_tau = tau;
        best_seg = j;
        best_f = std::clamp(f, 0.0, 1.0);
      }
    };
    if (n == m) {
      for (long k = -4; k <= 4; ++k) scan(static_cast<std::size_t>((static_cast<long>(i) + k + static_cast<long>(m)) % static_cast<long>(m)));
    }
    if (!(std::abs(best_tau) <= feature)) {
      for (std::size_t j = 0; j < m; ++j) scan(j);
    }
    if (!(std::abs(best_tau) <= feature)) {
      throw Error(ErrorKind::Matching, "normal from node " + std::to_string(i) + " does not meet the next curve");
    }
    const std::size_t j1 = (best_seg + 1) % m;
    const double kappa_b = (1.0 - best_f) * gb.curvature[best_seg] + best_f * gb.curvature[j1];
    const double rhs_b_at = (1.0 - best_f) * rhs_b[best_seg] + best_f * rhs_b[j1];
    const double lhs = (kappa_b - ga.curvature[i]) / dt;
    const double rhs = 0.5 * (rhs_a[i] + rhs_b_at);
    const double w = ga.arc_weight[i];
    num += (lhs - rhs) * (lhs - rhs) * w;
    den += rhs * rhs * w;
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num / den);
}

double isoperimetric_sup(const ClosedCurve& curve) {
  const std::size_t n = curve.size();
  const auto edges = edge_lengths(curve);
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + edges[i];
  const double total = cum[n];
  const std::size_t stride = n > kAllPairsLimit ? kPairStride : 1;
  double best = -INFINITY;
  for (std::size_t i = 0; i < n; i += stride) {
    for (std::size_t j = i + stride; j < n; j += stride) {
      const double d = norm(curve[j] - curve[i]);
      if (d == 0.0) continue;
      const double arc = cum[j] - cum[i];
      const double l = std::min(arc, total - arc);
      best = std::max(best, total / d * std::sin(std::numbers::pi * l / total));
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::DegenerateGeometry, "all node pairs coincide");
  return best;
}

double huisken_weight(const ClosedCurve& curve, Vec2 x0, double t0, double t) {
  if (!(t < t0)) throw Error(ErrorKind::Domain, "huisken_weight needs t < t0");
  const double tau = t0 - t;
  const auto g = geometry(curve);
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const Vec2 r = curve[i] - x0;
    sum += std::exp(-dot(r, r) / (4.0 * tau)) * g.arc_weight[i];
  }
  return sum / std::sqrt(tau);
}

double min_distance(const ClosedCurve& a, const ClosedCurve& b) {
  return std::min(one_sided_distance(a, b), one_sided_distance(b, a));
}

const std::vector<std::string>& csf_series_columns() {
  static const std::vector<std::string> cols = {"length",  "area",        "sup_abs_kappa", "iso_sup",
                                                "huisken", "len_residual", "kappa_residual"};
  return cols;
}

namespace {

std::vector<double> sample_row(const CsfRunConfig& cfg, const FlowState& s, const std::optional<FlowState>& partner) {
  const auto g = geometry(s.curve);
  double sup_kappa = 0.0;
  for (double k : g.curvature) sup_kappa = std::max(sup_kappa, std::abs(k));
  std::vector<double> row{g.length, enclosed_area(s.curve), sup_kappa, isoperimetric_sup(s.curve), kMissing,
                          kMissing, kMissing};
  if (cfg.huisken && s.time < cfg.huisken->t0) {
    row[4] = huisken_weight(s.curve, cfg.huisken->x0, cfg.huisken->t0, s.time);
  }
  if (cfg.residuals) {
    // Probe step from a freshly resampled copy; the run itself is untouched.
    try {
      FlowState probe{resample_arclength(s.curve, s.curve.size()), s.time, 0};
      FlowState probe_next = advance(probe, csf_max_dt(probe.curve, cfg.policy), cfg.policy);
      row[5] = length_rate_residual(probe, probe_next);
      row[6] = curvature_evolution_residual(probe, probe_next);
    } catch (const Error&) {
      // Near extinction the probe may fail; the residual columns stay empty.
    }
  }
  if (partner) row.push_back(min_distance(s.curve, partner->curve));
  return row;
}

}  // namespace

CsfRunResult run(const CsfRunConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw Error(ErrorKind::Config, "t_end must be positive");
  auto columns = csf_series_columns();
  if (cfg.partner) columns.push_back("min_distance");
  CsfRunResult result{DiagnosticSeries(columns), FlowState{cfg.initial, 0.0, 0}, std::nullopt, false, 0.0, 0};
  FlowState state{cfg.initial, 0.0, 0};
  std::optional<FlowState> partner;
  if (cfg.partner) partner = FlowState{*cfg.partner, 0.0, 0};
  const double l0 = length(state.curve);
  const double partner_l0 = partner ? length(partner->curve) : 0.0;
  const std::size_t every = std::max<std::size_t>(cfg.sample_every, 1);

  result.series.append(state.time, sample_row(cfg, state, partner));
  double last_sampled = state.time;
  double prev_time = state.time;
  bool extinct = false;
  double extinction_time = 0.0;

  while (state.time < cfg.t_end) {
    double dt = csf_max_dt(state.curve, cfg.policy);
    if (partner) dt = std::min(dt, csf_max_dt(partner->curve, cfg.policy));
    const bool last = state.time + dt >= cfg.t_end;
    if (last) dt = cfg.t_end - state.time;
    FlowState next = state;
    std::optional<FlowState> partner_next = partner;
    try {
      next = step(state, dt, cfg.policy);
      if (partner) partner_next = step(*partner, dt, cfg.policy);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ExtinctionImminent) throw;
      extinct = true;
      extinction_time = 0.5 * (prev_time + state.time);
      break;
    }
    prev_time = state.time;
    state = std::move(next);
    partner = std::move(partner_next);
    if (last) state.time = cfg.t_end;
    ++result.steps;
    if (length(state.curve) < kExtinctionLengthFraction * l0 ||
        (partner && length(partner->curve) < kExtinctionLengthFraction * partner_l0)) {
      extinct = true;
      extinction_time = 0.5 * (prev_time + state.time);
      break;
    }
    if (result.steps % every == 0) {
      result.series.append(state.time, sample_row(cfg, state, partner));
      last_sampled = state.time;
    }
  }
  if (state.time > last_sampled) result.series.append(state.time, sample_row(cfg, state, partner));
  result.final_state = state;
  result.final_partner = partner;
  result.extinct = extinct;
  result.end_time = extinct ? extinction_time : state.time;
  return result;
}

}  // namespace geoflow
