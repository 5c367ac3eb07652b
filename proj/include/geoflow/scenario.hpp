#pragma once
// Declarative scenario runs: a JSON config selects a flow, its initial data
// and step policy; the runner writes CSV/JSON artifacts and a report.
//
// Config keys:
//   spec_version  "1"
//   kind          csf | mcf_graph | heat | ricci2d | fisher | mse | delta
//   name          label used for the default output directory
//   initial       {"name": <built-in>, ...parameters}
//   resolution    nodes (csf) or grid points per axis
//   policy        {"cfl_factor", "t_end", "sample_every"}
//   diagnostics   series columns to report (default: all of the kind)
//   output_dir    defaults to "geoflow_out/<name>"; GEOFLOW_OUT overrides
//   seed          seeds all randomised test data
// plus kind-specific keys documented in README.md.
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace geoflow {

inline constexpr const char* kSpecVersion = "1";

struct ScenarioConfig {
  std::string spec_version = kSpecVersion;
  std::string kind;
  std::string name;
  nlohmann::json initial = nlohmann::json::object();
  std::size_t resolution = 0;
  double cfl_factor = 0.0;  ///< 0 selects the module default
  double t_end = 0.0;
  std::size_t sample_every = 0;  ///< 0 selects the module default
  std::vector<std::string> diagnostics;
  std::string output_dir;
  std::uint64_t seed = 0;
  nlohmann::json extra = nlohmann::json::object();  ///< kind-specific keys

  /// Validates and converts. Throws config errors naming the offending field.
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct InvariantResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Artifact {
  std::string role;
  std::string path;
  bool complete = true;  ///< false for data written before a solver error
};

struct RunReport {
  nlohmann::json scenario;
  double wall_seconds = 0.0;
  std::string termination;  ///< t_end | extinction | error
  std::string error;        ///< message when termination == "error"
  std::string error_kind;
  std::vector<Artifact> artifacts;
  /// diagnostic name -> artifact path, or "skipped: <reason>"
  std::vector<std::pair<std::string, std::string>> diagnostics;
  std::vector<InvariantResult> invariants;

  bool invariants_pass() const;
  nlohmann::json to_json() const;
};

/// Output directory after applying GEOFLOW_OUT.
std::filesystem::path output_directory(const ScenarioConfig& config);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Runs the scenario and writes its artifacts plus report.json. Solver errors
/// are caught and reported with termination "error"; config errors propagate.
RunReport run_scenario(const ScenarioConfig& config);

}  // namespace geoflow
