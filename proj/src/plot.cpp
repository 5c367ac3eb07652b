#include "geoflow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geoflow/error.hpp"
#include "geoflow/scenario.hpp"

namespace geoflow {
namespace {

constexpr double kWidth = 720, kHeight = 450;
constexpr double kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick positions at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

void widen(double& lo, double& hi) {
  if (hi > lo) return;
  const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
  lo -= pad;
  hi += pad;
}

}  // namespace

std::string render_svg(const DiagnosticSeries& series, const std::vector<std::string>& columns, const std::string& title) {
  if (series.empty()) throw Error(ErrorKind::Config, "series has no rows");
  if (columns.empty()) throw Error(ErrorKind::Config, "no columns requested");
  std::vector<std::vector<double>> ys;
  double ylo = INFINITY, yhi = -INFINITY;
  for (const std::string& c : columns) {
    if (!series.has_column(c)) throw Error(ErrorKind::Config, "series has no column '" + c + "'");
    ys.push_back(series.column(c));
    bool any = false;
    for (double v : ys.back())
      if (std::isfinite(v)) {
        ylo = std::min(ylo, v);
        yhi = std::max(yhi, v);
        any = true;
      }
    if (!any) throw Error(ErrorKind::Config, "column '" + c + "' has no finite values");
  }
  const std::vector<double>& t = series.times();
  double xlo = t.front(), xhi = t.back();
  widen(xlo, xhi);
  widen(ylo, yhi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - ylo) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  os << "<g stroke=\"#e0e0e0\" stroke-width=\"1\">\n";
  const std::vector<double> xt = ticks(xlo, xhi), yt = ticks(ylo, yhi);
  for (double x : xt) os << "<line x1=\"" << num(sx(x)) << "\" y1=\"" << kTop << "\" x2=\"" << num(sx(x)) << "\" y2=\"" << kTop + ph << "\"/>\n";
  for (double y : yt) os << "<line x1=\"" << kLeft << "\" y1=\"" << num(sy(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << num(sy(y)) << "\"/>\n";
  os << "</g>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double x : xt)
    os << "<text x=\"" << num(sx(x)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  for (double y : yt)
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(sy(y) + 4) << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">t</text>\n";
  const std::string ylabel = columns.size() == 1 ? columns.front() : "value";
  os << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << kTop + ph / 2
     << ")\">" << escape(ylabel) << "</text>\n";

  for (std::size_t c = 0; c < columns.size(); ++c) {
    os << "<polyline fill=\"none\" stroke=\"" << kColors[c % std::size(kColors)] << "\" stroke-width=\"1.5\" data-column=\""
       << escape(columns[c]) << "\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!std::isfinite(ys[c][i])) continue;
      os << (first ? "" : " ") << num(sx(t[i])) << ',' << num(sy(ys[c][i]));
      first = false;
    }
    os << "\"/>\n";
  }
  if (columns.size() > 1) {
    os << "<g class=\"legend\">\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const double y = kTop + 14 + 18 * static_cast<double>(c);
      const double x = kLeft + pw - 150;
      os << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 24 << "\" y2=\"" << y << "\" stroke=\""
         << kColors[c % std::size(kColors)] << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << x + 30 << "\" y=\"" << y + 4 << "\">" << escape(columns[c]) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void plot_csv(const std::filesystem::path& csv, const std::vector<std::string>& columns, const std::filesystem::path& svg) {
  std::ifstream is(csv);
  if (!is) throw Error(ErrorKind::Config, "cannot open \"" + csv.string() + "\"");
  const DiagnosticSeries series = DiagnosticSeries::read_csv(is);
  write_atomic(svg, render_svg(series, columns, csv.filename().string()));
}

}  // namespace geoflow
