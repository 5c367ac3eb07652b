#pragma once

// Scalar samples on a uniform periodic grid in one or two dimensions.
//
// Values are stored as an affine part plus a periodic remainder,
// u(x) = slope . x + v(x), so tilted planes are representable on the torus.
// All finite-difference helpers act on u; the affine part contributes only to
// first derivatives.

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace geoflow {

inline constexpr std::size_t kMinGridPoints = 16;

class ScalarField {
 public:
  /// 1D field of n samples, v_i = fn(i * h) with h = period / n.
  static ScalarField one_d(std::size_t n, double period, const std::function<double(double)>& fn,
                           double slope_x = 0.0);
  /// 2D n x n field, v_ij = fn(i * h, j * h); index i runs along x.
  static ScalarField two_d(std::size_t n, double period, const std::function<double(double, double)>& fn,
                           double slope_x = 0.0, double slope_y = 0.0);

  std::size_t dim() const { return ny_ == 1 ? 1 : 2; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return periodic_.size(); }
  double h() const { return h_; }
  double period() const { return h_ * static_cast<double>(nx_); }
  double slope_x() const { return slope_x_; }
  double slope_y() const { return slope_y_; }
  /// Cell measure h^dim.
  double cell() const { return dim() == 1 ? h_ : h_ * h_; }

  std::span<const double> periodic() const { return periodic_; }
  std::span<double> periodic_mut() { return periodic_; }

  /// Periodic remainder with wrap-around indices.
  double v(long i, long j = 0) const {
    const long nx = static_cast<long>(nx_), ny = static_cast<long>(ny_);
    const long ii = ((i % nx) + nx) % nx;
    const long jj = ((j % ny) + ny) % ny;
    return periodic_[static_cast<std::size_t>(jj * nx + ii)];
  }
  /// Full value u at grid node (i, j), i, j in range.
  double at(std::size_t i, std::size_t j = 0) const;
  double x(std::size_t i) const { return h_ * static_cast<double>(i); }

  /// Throws blow-up if any value is non-finite.
  void check_finite() const;

  // Centered differences: second order (d1_*, lap) and fourth order (*4).
  double dx(std::size_t i, std::size_t j = 0) const;
  double dy(std::size_t i, std::size_t j = 0) const;
  double dx4(std::size_t i, std::size_t j = 0) const;
  double dy4(std::size_t i, std::size_t j = 0) const;
  double dxx(std::size_t i, std::size_t j = 0) const;
  double dyy(std::size_t i, std::size_t j = 0) const;
  double dxy(std::size_t i, std::size_t j = 0) const;
  double dxx4(std::size_t i, std::size_t j = 0) const;
  double dyy4(std::size_t i, std::size_t j = 0) const;
  /// 3- or 5-point Laplacian.
  double lap(std::size_t i, std::size_t j = 0) const;
  double lap4(std::size_t i, std::size_t j = 0) const;

  double min() const;
  double max() const;
  /// Sum of u over the grid times the cell measure (periodic part only when
  /// the slope is nonzero).
  double integral() const;

  /// 1D: header `x,u`; 2D: `# n=<n> h=<h>` followed by row-major values of
  /// the periodic part, with ` ax=<..> ay=<..>` appended to the header when a
  /// slope is present.
  void write_csv(std::ostream& os) const;
  static ScalarField read_csv(std::istream& is);

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  ScalarField(std::size_t nx, std::size_t ny, double h, std::vector<double> values, double sx, double sy);

  std::size_t nx_ = 0;
  std::size_t ny_ = 1;
  double h_ = 0.0;
  std::vector<double> periodic_;
  double slope_x_ = 0.0;
  double slope_y_ = 0.0;
};

}  // namespace geoflow
