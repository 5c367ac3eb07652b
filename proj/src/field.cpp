#include "geoflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "geoflow/error.hpp"
#include "geoflow/series.hpp"

namespace geoflow {

ScalarField::ScalarField(std::size_t nx, std::size_t ny, double h, std::vector<double> values, double sx, double sy)
    : nx_(nx), ny_(ny), h_(h), periodic_(std::move(values)), slope_x_(sx), slope_y_(sy) {
  if (nx_ < kMinGridPoints || (ny_ != 1 && ny_ < kMinGridPoints)) {
    throw Error(ErrorKind::Contract, "grid needs at least 16 points per axis");
  }
  if (ny_ != 1 && ny_ != nx_) throw Error(ErrorKind::Contract, "2D grids must be square");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw Error(ErrorKind::Contract, "grid spacing must be positive");
  if (periodic_.size() != nx_ * ny_) throw Error(ErrorKind::Contract, "value count does not match grid");
  check_finite();
}

ScalarField ScalarField::one_d(std::size_t n, double period, const std::function<double(double)>& fn,
                               double slope_x) {
  const double h = period / static_cast<double>(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = fn(h * static_cast<double>(i));
  return ScalarField(n, 1, h, std::move(v), slope_x, 0.0);
}

ScalarField ScalarField::two_d(std::size_t n, double period, const std::function<double(double, double)>& fn,
                               double slope_x, double slope_y) {
  const double h = period / static_cast<double>(n);
  std::vector<double> v(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) v[j * n + i] = fn(h * static_cast<double>(i), h * static_cast<double>(j));
  }
  return ScalarField(n, n, h, std::move(v), slope_x, slope_y);
}

void ScalarField::check_finite() const {
  for (double x : periodic_) {
    if (!std::isfinite(x)) throw Error(ErrorKind::BlowUp, "non-finite value in scalar field");
  }
}

double ScalarField::at(std::size_t i, std::size_t j) const {
  return periodic_[j * nx_ + i] + slope_x_ * x(i) + slope_y_ * x(j);
}

#define GEOFLOW_IJ const long I = static_cast<long>(i), J = static_cast<long>(j)

double ScalarField::dx(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (v(I + 1, J) - v(I - 1, J)) / (2.0 * h_) + slope_x_;
}

double ScalarField::dy(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (v(I, J + 1) - v(I, J - 1)) / (2.0 * h_) + slope_y_;
}

double ScalarField::dx4(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (-v(I + 2, J) + 8.0 * v(I + 1, J) - 8.0 * v(I - 1, J) + v(I - 2, J)) / (12.0 * h_) + slope_x_;
}

double ScalarField::dy4(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (-v(I, J + 2) + 8.0 * v(I, J + 1) - 8.0 * v(I, J - 1) + v(I, J - 2)) / (12.0 * h_) + slope_y_;
}

double ScalarField::dxx(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (v(I + 1, J) - 2.0 * v(I, J) + v(I - 1, J)) / (h_ * h_);
}

double ScalarField::dyy(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (v(I, J + 1) - 2.0 * v(I, J) + v(I, J - 1)) / (h_ * h_);
}

double ScalarField::dxy(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (v(I + 1, J + 1) - v(I + 1, J - 1) - v(I - 1, J + 1) + v(I - 1, J - 1)) / (4.0 * h_ * h_);
}

double ScalarField::dxx4(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (-v(I + 2, J) + 16.0 * v(I + 1, J) - 30.0 * v(I, J) + 16.0 * v(I - 1, J) - v(I - 2, J)) /
         (12.0 * h_ * h_);
}

double ScalarField::dyy4(std::size_t i, std::size_t j) const {
  GEOFLOW_IJ;
  return (-v(I, J + 2) + 16.0 * v(I, J + 1) - 30.0 * v(I, J) + 16.0 * v(I, J - 1) - v(I, J - 2)) /
         (12.0 * h_ * h_);
}

#undef GEOFLOW_IJ

double ScalarField::lap(std::size_t i, std::size_t j) const {
  return dim() == 1 ? dxx(i) : dxx(i, j) + dyy(i, j);
}

double ScalarField::lap4(std::size_t i, std::size_t j) const {
  return dim() == 1 ? dxx4(i) : dxx4(i, j) + dyy4(i, j);
}

double ScalarField::min() const {
  double m = INFINITY;
  for (std::size_t j = 0; j < ny_; ++j)
    for (std::size_t i = 0; i < nx_; ++i) m = std::min(m, at(i, j));
  return m;
}

double ScalarField::max() const {
  double m = -INFINITY;
  for (std::size_t j = 0; j < ny_; ++j)
    for (std::size_t i = 0; i < nx_; ++i) m = std::max(m, at(i, j));
  return m;
}

double ScalarField::integral() const {
  double sum = 0.0;
  for (double x : periodic_) sum += x;
  return sum * cell();
}

void ScalarField::write_csv(std::ostream& os) const {
  if (dim() == 1) {
    if (slope_x_ != 0.0) os << "# ax=" << format_double(slope_x_) << '\n';
    os << "x,u\n";
    for (std::size_t i = 0; i < nx_; ++i) os << format_double(x(i)) << ',' << format_double(at(i)) << '\n';
    return;
  }
  os << "# n=" << nx_ << " h=" << format_double(h_);
  if (slope_x_ != 0.0 || slope_y_ != 0.0) {
    os << " ax=" << format_double(slope_x_) << " ay=" << format_double(slope_y_);
  }
  os << '\n';
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      if (i) os << ',';
      os << format_double(periodic_[j * nx_ + i]);
    }
    os << '\n';
  }
}

namespace {

double header_value(const std::string& header, const std::string& key, double fallback) {
  const auto pos = header.find(" " + key + "=");
  if (pos == std::string::npos) return fallback;
  return std::stod(header.substr(pos + key.size() + 2));
}

}  // namespace

ScalarField ScalarField::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Config, "empty field CSV");
  double ax = 0.0;
  if (line.rfind("# ax=", 0) == 0) {
    ax = std::stod(line.substr(5));
    if (!std::getline(is, line)) throw Error(ErrorKind::Config, "truncated field CSV");
  }
  if (line == "x,u") {
    std::vector<double> xs, us;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw Error(ErrorKind::Config, "malformed field row: " + line);
      xs.push_back(std::stod(line.substr(0, comma)));
      us.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.size() < 2) throw Error(ErrorKind::Config, "1D field CSV needs at least two rows");
    const double h = xs[1] - xs[0];
    for (std::size_t i = 0; i < us.size(); ++i) us[i] -= ax * xs[i];
    const std::size_t n = us.size();
    return ScalarField(n, 1, h, std::move(us), ax, 0.0);
  }
  if (line.rfind("# n=", 0) != 0) throw Error(ErrorKind::Config, "unrecognised field CSV header: " + line);
  const std::string header = " " + line.substr(2);
  const auto n = static_cast<std::size_t>(header_value(header, "n", 0));
  const double h = header_value(header, "h", 0.0);
  const double sx = header_value(header, "ax", 0.0);
  const double sy = header_value(header, "ay", 0.0);
  std::vector<double> values;
  values.reserve(n * n);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
  }
  if (values.size() != n * n) throw Error(ErrorKind::Config, "2D field CSV has wrong number of values");
  return ScalarField(n, n, h, std::move(values), sx, sy);
}

}  // namespace geoflow
