#include "geoflow/curve.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "geoflow/error.hpp"

namespace geoflow {
namespace {

constexpr double kDegenerateEdgeFraction = 1e-14;
constexpr double kResampleTolerance = 1e-10;
constexpr int kResamplePasses = 5;

// Periodic cubic spline through the nodes, parameterised by cumulative chord
// length. Second derivatives come from the cyclic tridiagonal system, solved
// with the Sherman-Morrison correction.
class PeriodicSpline {
 public:
  PeriodicSpline(std::span<const Vec2> nodes, const std::vector<double>& cum)
      : nodes_(nodes.begin(), nodes.end()), cum_(cum), m_(nodes.size()) {
    const std::size_t n = nodes_.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = cum_[i + 1] - cum_[i];
    // Row i: h[i-1] M[i-1] + 2(h[i-1]+h[i]) M[i] + h[i] M[i+1] = rhs_i.
    std::vector<double> sub(n), diag(n), sup(n);
    std::vector<Vec2> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
      sub[i] = h[im];
      diag[i] = 2.0 * (h[im] + h[i]);
      sup[i] = h[i];
      rhs[i] = 6.0 * ((1.0 / h[i]) * (nodes_[ip] - nodes_[i]) - (1.0 / h[im]) * (nodes_[i] - nodes_[im]));
    }
    solve_cyclic(sub, diag, sup, rhs);
  }

  Vec2 operator()(double s) const {
    const std::size_t n = nodes_.size();
    const double total = cum_.back();
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(cum_.begin(), it)) - 1;
    i = std::min(i, n - 1);
    const std::size_t ip = (i + 1) % n;
    const double h = cum_[i + 1] - cum_[i];
    const double a = (cum_[i + 1] - s) / h;
    const double b = 1.0 - a;
    return a * nodes_[i] + b * nodes_[ip] + (h * h / 6.0) * ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[ip]);
  }

 private:
  // Thomas algorithm on the cyclic system via Sherman-Morrison.
  void solve_cyclic(const std::vector<double>& sub, std::vector<double> diag, const std::vector<double>& sup,
                    const std::vector<Vec2>& rhs) {
    const std::size_t n = diag.size();
    const double alpha = sup[n - 1];  // row n-1 couples to column 0
    const double beta = sub[0];       // row 0 couples to column n-1
    const double gamma = -diag[0];
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
    auto thomas = [&](std::vector<Vec2> r) {
      std::vector<double> c(n);
      c[0] = sup[0] / diag[0];
      r[0] = (1.0 / diag[0]) * r[0];
      for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        r[i] = (1.0 / denom) * (r[i] - sub[i] * r[i - 1]);
      }
      for (std::size_t i = n - 1; i-- > 0;) r[i] -= c[i] * r[i + 1];
      return r;
    };
    const auto x = thomas(rhs);
    std::vector<Vec2> u(n);
    u[0] = {gamma, gamma};
    u[n - 1] = {alpha, alpha};
    const auto z = thomas(u);
    // v = (1, 0, ..., 0, beta / gamma); applied per coordinate.
    const double vx_x = x[0].x + beta / gamma * x[n - 1].x;
    const double vx_y = x[0].y + beta / gamma * x[n - 1].y;
    const double vz_x = z[0].x + beta / gamma * z[n - 1].x;
    const double vz_y = z[0].y + beta / gamma * z[n - 1].y;
    const double fx = vx_x / (1.0 + vz_x);
    const double fy = vx_y / (1.0 + vz_y);
    for (std::size_t i = 0; i < n; ++i) m_[i] = {x[i].x - fx * z[i].x, x[i].y - fy * z[i].y};
  }

  std::vector<Vec2> nodes_;
  std::vector<double> cum_;
  std::vector<Vec2> m_;
};

}  // namespace

ClosedCurve::ClosedCurve(std::vector<Vec2> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < kMinCurveNodes) {
    throw Error(ErrorKind::DegenerateGeometry,
                "closed curve needs at least 8 nodes, got " + std::to_string(nodes_.size()));
  }
  double total = 0.0;
  double shortest = INFINITY;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Vec2 e = nodes_[(i + 1) % nodes_.size()] - nodes_[i];
    const double len = norm(e);
    if (!std::isfinite(len)) {
      throw Error(ErrorKind::DegenerateGeometry, "non-finite node coordinate");
    }
    total += len;
    shortest = std::min(shortest, len);
  }
  if (!(shortest > kDegenerateEdgeFraction * total)) {
    throw Error(ErrorKind::DegenerateGeometry, "zero-length edge in closed curve");
  }
}

const Vec2& ClosedCurve::at_cyclic(long i) const {
  const long n = static_cast<long>(nodes_.size());
  return nodes_[static_cast<std::size_t>(((i % n) + n) % n)];
}

CurveGeometry geometry(const ClosedCurve& curve) {
  const std::size_t n = curve.size();
  CurveGeometry g;
  g.tangent.resize(n);
  g.normal.resize(n);
  g.curvature.resize(n);
  g.arc_weight.resize(n);
  const auto edges = edge_lengths(curve);
  for (std::size_t i = 0; i < n; ++i) {
    const long li = static_cast<long>(i);
    const Vec2 prev = curve.at_cyclic(li - 1);
    const Vec2 here = curve[i];
    const Vec2 next = curve.at_cyclic(li + 1);
    const Vec2 d1 = 0.5 * (next - prev);
    const Vec2 d2 = next - 2.0 * here + prev;
    const double speed = norm(d1);
    if (!(speed > 0.0)) {
      throw Error(ErrorKind::DegenerateGeometry, "vanishing tangent at node " + std::to_string(i));
    }
    g.tangent[i] = (1.0 / speed) * d1;
    g.normal[i] = rotate_cw(g.tangent[i]);
    g.curvature[i] = cross(d1, d2) / (speed * speed * speed);
    g.arc_weight[i] = 0.5 * (edges[(i + n - 1) % n] + edges[i]);
    g.length += edges[i];
  }
  return g;
}

std::vector<double> edge_lengths(const ClosedCurve& curve) {
  const std::size_t n = curve.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = norm(curve[(i + 1) % n] - curve[i]);
  return out;
}

double length(const ClosedCurve& curve) {
  double total = 0.0;
  for (double e : edge_lengths(curve)) total += e;
  return total;
}

double min_edge_length(const ClosedCurve& curve) {
  const auto edges = edge_lengths(curve);
  return *std::min_element(edges.begin(), edges.end());
}

double total_curvature(const ClosedCurve& curve) {
  const std::size_t n = curve.size();
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 in = curve[i] - curve[(i + n - 1) % n];
    const Vec2 out = curve[(i + 1) % n] - curve[i];
    turning += std::atan2(cross(in, out), dot(in, out));
  }
  return turning;
}

double enclosed_area(const ClosedCurve& curve) {
  const std::size_t n = curve.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(curve[i], curve[(i + 1) % n]);
  return 0.5 * twice;
}

double edge_nonuniformity(const ClosedCurve& curve) {
  const auto edges = edge_lengths(curve);
  const auto [lo, hi] = std::minmax_element(edges.begin(), edges.end());
  double mean = 0.0;
  for (double e : edges) mean += e;
  mean /= static_cast<double>(edges.size());
  return (*hi - *lo) / mean;
}

ClosedCurve resample_arclength(const ClosedCurve& curve, std::size_t n) {
  if (n < kMinCurveNodes) {
    throw Error(ErrorKind::DegenerateGeometry, "resample target must be at least 8 nodes");
  }
  const auto src = curve.nodes();
  const auto edges = edge_lengths(curve);
  std::vector<double> cum(src.size() + 1, 0.0);
  for (std::size_t i = 0; i < src.size(); ++i) cum[i + 1] = cum[i] + edges[i];
  const double total = cum.back();
  const PeriodicSpline spline(src, cum);

  // Spline parameters of the new nodes; the first pass is plain chord-length
  // spacing, later passes equalise the chords between consecutive samples.
  std::vector<double> s(n + 1);
  for (std::size_t k = 0; k <= n; ++k) s[k] = total * static_cast<double>(k) / static_cast<double>(n);
  std::vector<Vec2> pts(n);
  std::vector<double> chord_cum(n + 1);
  for (int pass = 0; pass < kResamplePasses; ++pass) {
    for (std::size_t k = 0; k < n; ++k) pts[k] = spline(s[k]);
    chord_cum[0] = 0.0;
    double lo = INFINITY, hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = norm(pts[(k + 1) % n] - pts[k]);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      chord_cum[k + 1] = chord_cum[k] + c;
    }
    const double mean = chord_cum[n] / static_cast<double>(n);
    if ((hi - lo) / mean <= kResampleTolerance) break;
    // Invert the piecewise-linear map chord position -> source position.
    std::vector<double> next(n + 1);
    next[0] = 0.0;
    next[n] = total;
    std::size_t j = 0;
    for (std::size_t k = 1; k < n; ++k) {
      const double target = chord_cum[n] * static_cast<double>(k) / static_cast<double>(n);
      while (j + 1 < n && chord_cum[j + 1] < target) ++j;
      const double f = (target - chord_cum[j]) / (chord_cum[j + 1] - chord_cum[j]);
      next[k] = s[j] + f * (s[j + 1] - s[j]);
    }
    s.swap(next);
  }
  for (std::size_t k = 0; k < n; ++k) pts[k] = spline(s[k]);
  return ClosedCurve(std::move(pts));
}

ClosedCurve make_circle(double radius, std::size_t n, Vec2 center, int windings) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * windings * static_cast<double>(i) / static_cast<double>(n);
    pts[i] = center + Vec2{radius * std::cos(t), radius * std::sin(t)};
  }
  return ClosedCurve(std::move(pts));
}

ClosedCurve make_ellipse(double a, double b, std::size_t n, Vec2 center) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts[i] = center + Vec2{a * std::cos(t), b * std::sin(t)};
  }
  return ClosedCurve(std::move(pts));
}

void write_curve_csv(std::ostream& os, const ClosedCurve& curve) {
  os << "x,y\n";
  char buf[64];
  for (const Vec2& p : curve.nodes()) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
    os << buf;
  }
}

ClosedCurve read_curve_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y", 0) != 0) {
    throw Error(ErrorKind::Config, "curve CSV must start with header 'x,y'");
  }
  std::vector<Vec2> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::Config, "malformed curve row: " + line);
    pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return ClosedCurve(std::move(pts));
}

}  // namespace geoflow
