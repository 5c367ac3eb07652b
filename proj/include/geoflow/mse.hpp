#pragma once

// Minimal surface equation div(Df / sqrt(1 + |Df|^2)) = 0 for graphs over a
// rectangle with Dirichlet data.
//
// The discretisation is variational: each grid cell is cut into two right
// triangles along its (i,j)-(i+1,j+1) diagonal, the graph is taken piecewise
// linear, and the discrete area is the exact area of that triangulated
// surface. The nodal residual is the area gradient divided by h^2, so the
// discrete first variation vanishes exactly where the residual does.

#include <functional>
#include <iosfwd>
#include <vector>

namespace geoflow {

/// Node values on a uniform (nx+1) x (ny+1) grid over a rectangle. Row-major
/// with j (the y index) outermost.
struct RectangleField {
  std::size_t nx = 0;  ///< cells along x
  std::size_t ny = 0;  ///< cells along y
  double h = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<double> values;

  std::size_t index(std::size_t i, std::size_t j) const { return j * (nx + 1) + i; }
  double operator()(std::size_t i, std::size_t j) const { return values[index(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) { return values[index(i, j)]; }
  double x(std::size_t i) const { return x0 + h * static_cast<double>(i); }
  double y(std::size_t j) const { return y0 + h * static_cast<double>(j); }
  bool on_boundary(std::size_t i, std::size_t j) const { return i == 0 || j == 0 || i == nx || j == ny; }

  static RectangleField sample(double x0, double x1, double y0, double y1, std::size_t n,
                               const std::function<double(double, double)>& fn);

  void write_csv(std::ostream& os) const;
  static RectangleField read_csv(std::istream& is);
  /// Boundary trace sidecar: `i,j,value`, one boundary node per row.
  void write_boundary_csv(std::ostream& os) const;

  friend bool operator==(const RectangleField&, const RectangleField&) = default;
};

/// Dirichlet problem: the boundary nodes of `data` carry the trace; interior
/// values are ignored. At least 16 cells per axis.
struct GraphProblem {
  RectangleField data;

  static GraphProblem from_function(double x0, double x1, double y0, double y1, std::size_t n,
                                    const std::function<double(double, double)>& boundary);
};

struct MseSolution {
  RectangleField field;
  std::vector<double> residual_history;  ///< sup-norm residual before each Newton step and at exit
  std::vector<double> step_lengths;      ///< accepted line-search step per iteration
  int iterations = 0;
  double residual = 0.0;
};

/// Damped Newton from the harmonic extension of the boundary data, Armijo
/// line search on the residual norm, stopping at sup-norm residual 1e-8.
/// Throws NonConvergenceError with the residual history on failure.
MseSolution solve_mse(const GraphProblem& problem, double tolerance = 1e-8, int max_iterations = 60);

/// Harmonic extension of the boundary trace (discrete Laplace equation).
RectangleField harmonic_extension(const GraphProblem& problem);

/// Sup-norm over interior nodes of the discrete MSE operator.
double mse_residual(const RectangleField& field);

/// Area of the triangulated graph.
double area(const RectangleField& field);

/// int Df . D eta / sqrt(1 + |Df|^2) on the triangulation. Contract error
/// when eta is nonzero on the boundary.
double first_variation(const RectangleField& field, const RectangleField& eta);

}  // namespace geoflow
