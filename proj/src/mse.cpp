#include "geoflow/mse.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "geoflow/error.hpp"
#include "geoflow/series.hpp"

namespace geoflow {
namespace {

constexpr std::size_t kMinCells = 16;

struct Triangle {
  std::array<std::size_t, 3> node;
  std::array<double, 3> bx;  // d(grad_x)/d(node value), times h
  std::array<double, 3> by;
};

template <typename Fn>
void for_each_triangle(const RectangleField& f, Fn&& fn) {
  for (std::size_t j = 0; j < f.ny; ++j) {
    for (std::size_t i = 0; i < f.nx; ++i) {
      const std::size_t a = f.index(i, j), b = f.index(i + 1, j), c = f.index(i + 1, j + 1), d = f.index(i, j + 1);
      fn(Triangle{{a, b, c}, {-1.0, 1.0, 0.0}, {0.0, -1.0, 1.0}});
      fn(Triangle{{a, c, d}, {0.0, 1.0, -1.0}, {-1.0, 0.0, 1.0}});
    }
  }
}

struct TriangleGradient {
  double gx, gy, w;
};

TriangleGradient gradient_of(const RectangleField& f, const std::vector<double>& v, const Triangle& t) {
  double gx = 0.0, gy = 0.0;
  for (int k = 0; k < 3; ++k) {
    gx += t.bx[k] * v[t.node[k]];
    gy += t.by[k] * v[t.node[k]];
  }
  gx /= f.h;
  gy /= f.h;
  return {gx, gy, std::sqrt(1.0 + gx * gx + gy * gy)};
}

// Gradient of the discrete area with respect to every node value.
std::vector<double> area_gradient(const RectangleField& f) {
  std::vector<double> grad(f.values.size(), 0.0);
  const double half_area = 0.5 * f.h * f.h;
  for_each_triangle(f, [&](const Triangle& t) {
    const auto g = gradient_of(f, f.values, t);
    for (int k = 0; k < 3; ++k) grad[t.node[k]] += half_area * (g.gx * t.bx[k] + g.gy * t.by[k]) / (f.h * g.w);
  });
  return grad;
}

double interior_sup(const RectangleField& f, const std::vector<double>& nodal) {
  double m = 0.0;
  for (std::size_t j = 1; j < f.ny; ++j)
    for (std::size_t i = 1; i < f.nx; ++i) m = std::max(m, std::abs(nodal[f.index(i, j)]));
  return m;
}

double residual_of(const RectangleField& f) {
  return interior_sup(f, area_gradient(f)) / (f.h * f.h);
}

class InteriorMap {
 public:
  explicit InteriorMap(const RectangleField& f) : slot_(f.values.size(), -1) {
    for (std::size_t j = 1; j < f.ny; ++j)
      for (std::size_t i = 1; i < f.nx; ++i) slot_[f.index(i, j)] = count_++;
  }
  long operator[](std::size_t node) const { return slot_[node]; }
  long size() const { return count_; }

 private:
  std::vector<long> slot_;
  long count_ = 0;
};

// Hessian of the area restricted to interior nodes. With `linear` the
// coefficients are frozen at zero slope, which gives the P1 Laplacian.
Eigen::SparseMatrix<double> area_hessian(const RectangleField& f, const InteriorMap& map, bool linear) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(f.nx * f.ny * 18);
  const double half_area = 0.5 * f.h * f.h;
  for_each_triangle(f, [&](const Triangle& t) {
    double mxx = 1.0, mxy = 0.0, myy = 1.0;
    if (!linear) {
      const auto g = gradient_of(f, f.values, t);
      const double w3 = g.w * g.w * g.w;
      mxx = 1.0 / g.w - g.gx * g.gx / w3;
      mxy = -g.gx * g.gy / w3;
      myy = 1.0 / g.w - g.gy * g.gy / w3;
    }
    for (int k = 0; k < 3; ++k) {
      const long row = map[t.node[k]];
      if (row < 0) continue;
      for (int l = 0; l < 3; ++l) {
        const long col = map[t.node[l]];
        if (col < 0) continue;
        const double v = half_area / (f.h * f.h) *
                         (t.bx[k] * (mxx * t.bx[l] + mxy * t.by[l]) + t.by[k] * (mxy * t.bx[l] + myy * t.by[l]));
        triplets.emplace_back(row, col, v);
      }
    }
  });
  Eigen::SparseMatrix<double> h(map.size(), map.size());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

void check_problem(const RectangleField& f) {
  if (f.nx < kMinCells || f.ny < kMinCells) throw Error(ErrorKind::Contract, "MSE grid needs at least 16x16 cells");
  if (f.values.size() != (f.nx + 1) * (f.ny + 1)) throw Error(ErrorKind::Contract, "MSE field has wrong size");
  if (!(f.h > 0.0)) throw Error(ErrorKind::Contract, "MSE grid spacing must be positive");
  for (std::size_t j = 0; j <= f.ny; ++j)
    for (std::size_t i = 0; i <= f.nx; ++i)
      if (f.on_boundary(i, j) && !std::isfinite(f(i, j))) throw Error(ErrorKind::Contract, "non-finite boundary value");
}

}  // namespace

RectangleField RectangleField::sample(double x0, double x1, double y0, double y1, std::size_t n,
                                      const std::function<double(double, double)>& fn) {
  const double hx = (x1 - x0) / static_cast<double>(n);
  const auto ny = static_cast<std::size_t>(std::llround((y1 - y0) / hx));
  if (std::abs(static_cast<double>(ny) * hx - (y1 - y0)) > 1e-12 * std::abs(y1 - y0)) {
    throw Error(ErrorKind::Contract, "rectangle sides must be multiples of the grid spacing");
  }
  RectangleField f{n, ny, hx, x0, y0, std::vector<double>((n + 1) * (ny + 1))};
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= n; ++i) f(i, j) = fn(f.x(i), f.y(j));
  return f;
}

void RectangleField::write_csv(std::ostream& os) const {
  os << "# n=" << nx + 1 << " h=" << format_double(h) << " ny=" << ny + 1 << " x0=" << format_double(x0)
     << " y0=" << format_double(y0) << '\n';
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      if (i) os << ',';
      os << format_double((*this)(i, j));
    }
    os << '\n';
  }
}

void RectangleField::write_boundary_csv(std::ostream& os) const {
  os << "i,j,value\n";
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      if (on_boundary(i, j)) os << i << ',' << j << ',' << format_double((*this)(i, j)) << '\n';
}

RectangleField RectangleField::read_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# n=", 0) != 0) {
    throw Error(ErrorKind::Config, "rectangle field CSV must start with '# n=<n> h=<h>'");
  }
  auto value = [&](const std::string& key, double fallback) {
    const auto pos = (" " + header.substr(2)).find(" " + key + "=");
    if (pos == std::string::npos) return fallback;
    return std::stod(header.substr(2).substr(pos + key.size() + 1));
  };
  const auto n = static_cast<std::size_t>(value("n", 0));
  const auto rows = static_cast<std::size_t>(value("ny", static_cast<double>(n)));
  if (n < 2 || rows < 2) throw Error(ErrorKind::Config, "rectangle field CSV has a bad size");
  RectangleField f{n - 1, rows - 1, value("h", 0.0), value("x0", 0.0), value("y0", 0.0), {}};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) f.values.push_back(std::stod(cell));
  }
  if (f.values.size() != n * rows) throw Error(ErrorKind::Config, "rectangle field CSV has wrong number of values");
  return f;
}

GraphProblem GraphProblem::from_function(double x0, double x1, double y0, double y1, std::size_t n,
                                         const std::function<double(double, double)>& boundary) {
  GraphProblem p{RectangleField::sample(x0, x1, y0, y1, n, [&](double x, double y) { return 0.0 * x * y; })};
  RectangleField& f = p.data;
  for (std::size_t j = 0; j <= f.ny; ++j)
    for (std::size_t i = 0; i <= f.nx; ++i)
      if (f.on_boundary(i, j)) f(i, j) = boundary(f.x(i), f.y(j));
  check_problem(f);
  return p;
}

RectangleField harmonic_extension(const GraphProblem& problem) {
  RectangleField f = problem.data;
  check_problem(f);
  const InteriorMap map(f);
  for (std::size_t j = 1; j < f.ny; ++j)
    for (std::size_t i = 1; i < f.nx; ++i) f(i, j) = 0.0;
  // With zero interior the linearised gradient is exactly K_IB f_B.
  const Eigen::SparseMatrix<double> k = area_hessian(f, map, true);
  Eigen::VectorXd rhs(map.size());
  {
    std::vector<double> grad(f.values.size(), 0.0);
    const double half_area = 0.5 * f.h * f.h;
    for_each_triangle(f, [&](const Triangle& t) {
      double gx = 0.0, gy = 0.0;
      for (int q = 0; q < 3; ++q) {
        gx += t.bx[q] * f.values[t.node[q]];
        gy += t.by[q] * f.values[t.node[q]];
      }
      for (int q = 0; q < 3; ++q) grad[t.node[q]] += half_area / (f.h * f.h) * (gx * t.bx[q] + gy * t.by[q]);
    });
    for (std::size_t node = 0; node < grad.size(); ++node)
      if (map[node] >= 0) rhs[map[node]] = -grad[node];
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::Singular, "Laplace system factorisation failed");
  const Eigen::VectorXd sol = solver.solve(rhs);
  for (std::size_t node = 0; node < f.values.size(); ++node)
    if (map[node] >= 0) f.values[node] = sol[map[node]];
  return f;
}

MseSolution solve_mse(const GraphProblem& problem, double tolerance, int max_iterations) {
  MseSolution out{harmonic_extension(problem), {}, {}, 0, 0.0};
  RectangleField& f = out.field;
  const InteriorMap map(f);
  double res = residual_of(f);
  out.residual_history.push_back(res);
  for (int it = 0; it < max_iterations && res > tolerance; ++it) {
    const auto grad = area_gradient(f);
    Eigen::VectorXd g(map.size());
    for (std::size_t node = 0; node < grad.size(); ++node)
      if (map[node] >= 0) g[map[node]] = grad[node];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(area_hessian(f, map, false));
    if (solver.info() != Eigen::Success) {
      throw NonConvergenceError("Newton system factorisation failed", f.values, out.residual_history);
    }
    const Eigen::VectorXd step = solver.solve(g);
    // Armijo backtracking on the residual norm.
    double alpha = 1.0;
    bool accepted = false;
    RectangleField trial = f;
    for (int halving = 0; halving < 30; ++halving, alpha *= 0.5) {
      for (std::size_t node = 0; node < f.values.size(); ++node)
        if (map[node] >= 0) trial.values[node] = f.values[node] - alpha * step[map[node]];
      const double trial_res = residual_of(trial);
      if (trial_res <= (1.0 - 1e-4 * alpha) * res) {
        f = trial;
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Rounding floor: the full step no longer reduces the residual.
      if (res <= 1e3 * tolerance) break;
      throw NonConvergenceError("line search failed", f.values, out.residual_history);
    }
    out.step_lengths.push_back(alpha);
    out.residual_history.push_back(res);
    ++out.iterations;
  }
  out.residual = res;
  if (res > tolerance) {
    throw NonConvergenceError("Newton iteration did not reach residual " + format_double(tolerance), f.values,
                              out.residual_history);
  }
  return out;
}

double mse_residual(const RectangleField& field) { return residual_of(field); }

double area(const RectangleField& field) {
  double sum = 0.0;
  for_each_triangle(field, [&](const Triangle& t) { sum += gradient_of(field, field.values, t).w; });
  return 0.5 * field.h * field.h * sum;
}

double first_variation(const RectangleField& field, const RectangleField& eta) {
  if (eta.nx != field.nx || eta.ny != field.ny || eta.values.size() != field.values.size()) {
    throw Error(ErrorKind::Contract, "perturbation must live on the field's grid");
  }
  for (std::size_t j = 0; j <= eta.ny; ++j)
    for (std::size_t i = 0; i <= eta.nx; ++i)
      if (eta.on_boundary(i, j) && eta(i, j) != 0.0) {
        throw Error(ErrorKind::Contract, "perturbation must vanish on the boundary");
      }
  double sum = 0.0;
  for_each_triangle(field, [&](const Triangle& t) {
    const auto g = gradient_of(field, field.values, t);
    const auto e = gradient_of(eta, eta.values, t);
    sum += (g.gx * e.gx + g.gy * e.gy) / g.w;
  });
  return 0.5 * field.h * field.h * sum;
}

}  // namespace geoflow
