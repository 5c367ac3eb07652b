#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace geoflow {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Time-stamped table of named scalar diagnostics. The first column is always
/// "t"; rows are strictly increasing in t. Missing values are NaN in memory and
/// empty fields on disk.
class DiagnosticSeries {
 public:
  DiagnosticSeries() = default;
  /// `columns` excludes the leading "t".
  explicit DiagnosticSeries(std::vector<std::string> columns);

  void append(double t, std::vector<double> values);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  double value(std::size_t row, const std::string& column) const;
  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  void write_csv(std::ostream& os) const;
  static DiagnosticSeries read_csv(std::istream& is);

  friend bool operator==(const DiagnosticSeries&, const DiagnosticSeries&);

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<std::string> columns_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

/// Shortest round-trip text for a double ("" for NaN).
std::string format_double(double v);

}  // namespace geoflow
