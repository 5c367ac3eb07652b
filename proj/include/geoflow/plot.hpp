#pragma once
// Self-contained SVG line charts of DiagnosticSeries columns.
#include <filesystem>
#include <string>
#include <vector>

#include "geoflow/series.hpp"

namespace geoflow {

/// One polyline per column against t, labelled axes, and a legend when more
/// than one column is drawn. Throws config on an empty series, an unknown
/// column, or a column without finite values.
std::string render_svg(const DiagnosticSeries& series, const std::vector<std::string>& columns,
                       const std::string& title = "");

/// Reads a series CSV and writes the chart atomically. Config errors cover
/// unreadable or empty files and schema mismatches.
void plot_csv(const std::filesystem::path& csv, const std::vector<std::string>& columns,
              const std::filesystem::path& svg);

}  // namespace geoflow
