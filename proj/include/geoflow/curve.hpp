#pragma once

// Discrete differential geometry of closed plane curves.
//
// A ClosedCurve is a cyclic polygon. Orientation convention: the normal is the
// tangent rotated by -pi/2, and curvature is signed so that a counterclockwise
// circle of radius r has kappa = +1/r. With these conventions the curve
// shortening velocity -kappa * N points inward.

#include <cmath>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace geoflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Rotation by -pi/2.
inline Vec2 rotate_cw(Vec2 a) { return {a.y, -a.x}; }

inline constexpr std::size_t kMinCurveNodes = 8;

/// Closed polygon, node i joined to node (i+1) mod N. Construction validates
/// the node count and rejects edges shorter than 1e-14 of the total length.
class ClosedCurve {
 public:
  explicit ClosedCurve(std::vector<Vec2> nodes);

  std::size_t size() const { return nodes_.size(); }
  std::span<const Vec2> nodes() const { return nodes_; }
  const Vec2& operator[](std::size_t i) const { return nodes_[i]; }
  /// Cyclic access; accepts any signed index.
  const Vec2& at_cyclic(long i) const;

 private:
  std::vector<Vec2> nodes_;
};

struct CurveGeometry {
  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;
  std::vector<double> curvature;
  /// Half-edge arc-length weights; they sum to `length`.
  std::vector<double> arc_weight;
  double length = 0.0;
};

CurveGeometry geometry(const ClosedCurve& curve);

double length(const ClosedCurve& curve);
double min_edge_length(const ClosedCurve& curve);
std::vector<double> edge_lengths(const ClosedCurve& curve);

/// Sum of exterior turning angles, i.e. the integral of kappa ds for the
/// polygon. Exactly 2*pi times the turning number.
double total_curvature(const ClosedCurve& curve);

/// Signed shoelace area, positive for counterclockwise curves.
double enclosed_area(const ClosedCurve& curve);

/// Redistribute n nodes along the polygon so consecutive chords are equal.
/// Node 0 stays fixed. Throws degenerate-geometry on zero-length edges.
ClosedCurve resample_arclength(const ClosedCurve& curve, std::size_t n);

/// Relative spread (max - min) / mean of the edge lengths.
double edge_nonuniformity(const ClosedCurve& curve);

// Built-in curves, all counterclockwise.
ClosedCurve make_circle(double radius, std::size_t n, Vec2 center = {}, int windings = 1);
ClosedCurve make_ellipse(double a, double b, std::size_t n, Vec2 center = {});

void write_curve_csv(std::ostream& os, const ClosedCurve& curve);
ClosedCurve read_curve_csv(std::istream& is);

}  // namespace geoflow
