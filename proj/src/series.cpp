#include "geoflow/series.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "geoflow/error.hpp"

namespace geoflow {
namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

DiagnosticSeries::DiagnosticSeries(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void DiagnosticSeries::append(double t, std::vector<double> values) {
  if (values.size() != columns_.size()) {
    throw Error(ErrorKind::Contract, "diagnostic row has wrong number of columns");
  }
  if (!times_.empty() && !(t > times_.back())) {
    throw Error(ErrorKind::Contract, "diagnostic rows must be strictly increasing in time");
  }
  times_.push_back(t);
  values_.push_back(std::move(values));
}

std::size_t DiagnosticSeries::index_of(const std::string& name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw Error(ErrorKind::Contract, "no diagnostic column '" + name + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

bool DiagnosticSeries::has_column(const std::string& name) const {
  return name == "t" || std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

double DiagnosticSeries::value(std::size_t row, const std::string& column) const {
  if (column == "t") return times_.at(row);
  return values_.at(row)[index_of(column)];
}

std::vector<double> DiagnosticSeries::column(const std::string& name) const {
  if (name == "t") return times_;
  const std::size_t j = index_of(name);
  std::vector<double> out;
  out.reserve(values_.size());
  for (const auto& row : values_) out.push_back(row[j]);
  return out;
}

void DiagnosticSeries::write_csv(std::ostream& os) const {
  os << 't';
  for (const auto& c : columns_) os << ',' << c;
  os << '\n';
  for (std::size_t r = 0; r < times_.size(); ++r) {
    os << format_double(times_[r]);
    for (double v : values_[r]) os << ',' << format_double(v);
    os << '\n';
  }
}

DiagnosticSeries DiagnosticSeries::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.empty()) {
    throw Error(ErrorKind::Config, "diagnostic CSV is empty");
  }
  auto header = split_commas(line);
  if (header.empty() || header.front() != "t") {
    throw Error(ErrorKind::Config, "diagnostic CSV header must start with 't'");
  }
  DiagnosticSeries series(std::vector<std::string>(header.begin() + 1, header.end()));
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Config, "diagnostic CSV row " + std::to_string(lineno) + " has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    try {
      for (std::size_t j = 1; j < fields.size(); ++j) {
        values.push_back(fields[j].empty() ? kMissing : std::stod(fields[j]));
      }
      series.append(std::stod(fields[0]), std::move(values));
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Config, "non-numeric field in diagnostic CSV row " + std::to_string(lineno));
    }
  }
  return series;
}

bool operator==(const DiagnosticSeries& a, const DiagnosticSeries& b) {
  if (a.columns_ != b.columns_ || a.times_ != b.times_) return false;
  for (std::size_t r = 0; r < a.values_.size(); ++r) {
    for (std::size_t j = 0; j < a.columns_.size(); ++j) {
      const double x = a.values_[r][j], y = b.values_[r][j];
      if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
    }
  }
  return true;
}

}  // namespace geoflow
