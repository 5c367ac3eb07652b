#pragma once
// Acceptance cases shared by `geoflow verify` and the acceptance test binary.
#include <string>
#include <vector>

#include <json.hpp>

namespace geoflow {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  ///< how value is compared with limit, e.g. "<="
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<std::string> modules;
  std::vector<Check> checks;
  double seconds = 0.0;
  bool pass() const;
};

inline constexpr int kCriterionCount = 15;

/// "all" followed by the module names accepted by `criteria_for`.
const std::vector<std::string>& verify_suites();

/// Criterion ids exercised by a suite. Throws config on an unknown name.
std::vector<int> criteria_for(const std::string& suite);

/// Runs one acceptance case. Library errors are caught and recorded as a
/// failing check named after the error kind.
CriterionResult run_criterion(int id);

/// `PASS [07] title` or `FAIL [07] title :: failing checks`.
std::string format_line(const CriterionResult& result);

nlohmann::json summary_json(const std::string& suite, const std::vector<CriterionResult>& results);

}  // namespace geoflow
