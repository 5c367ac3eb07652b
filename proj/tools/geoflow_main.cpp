// geoflow: run scenarios, verify acceptance criteria, plot diagnostic series.
//
// Exit codes: 0 success, 2 config error, 3 solver error, 4 verification failure.
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geoflow/error.hpp"
#include "geoflow/plot.hpp"
#include "geoflow/scenario.hpp"
#include "geoflow/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

std::vector<std::string> split_columns(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_run(const std::string& config_path) {
  const geoflow::ScenarioConfig cfg = geoflow::ScenarioConfig::load(config_path);
  const geoflow::RunReport rep = geoflow::run_scenario(cfg);
  std::cout << rep.to_json().dump(2) << "\n";
  if (rep.termination == "error") {
    std::cerr << "geoflow: solver error: " << rep.error << "\n";
    return kExitSolver;
  }
  if (!rep.invariants_pass()) {
    for (const auto& inv : rep.invariants)
      if (!inv.pass) std::cerr << "geoflow: invariant failed: " << inv.name << " (" << inv.detail << ")\n";
    return kExitVerify;
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, bool json_only) {
  const std::vector<int> ids = geoflow::criteria_for(suite);
  std::vector<geoflow::CriterionResult> results;
  bool ok = true;
  for (int id : ids) {
    results.push_back(geoflow::run_criterion(id));
    ok = ok && results.back().pass();
    if (!json_only) std::cout << geoflow::format_line(results.back()) << std::endl;
  }
  const nlohmann::json summary = geoflow::summary_json(suite, results);
  const char* env = std::getenv("GEOFLOW_OUT");
  const std::filesystem::path dir = env && *env ? env : "geoflow_out";
  geoflow::write_atomic(dir / "verify_summary.json", summary.dump(2) + "\n");
  if (json_only) std::cout << summary.dump(2) << "\n";
  return ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric flow laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a scenario described by a JSON config");
  run->add_option("config", config_path, "Scenario config file")->required();

  std::string suite = "all";
  bool json_only = false;
  auto* verify = app.add_subcommand("verify", "Run the acceptance criteria (all or one module)");
  verify->add_option("module", suite, "all or a module name");
  verify->add_flag("--json", json_only, "Print only the JSON summary");

  std::string csv, cols, out;
  auto* plot = app.add_subcommand("plot", "Plot series columns to SVG");
  plot->add_option("csv", csv, "DiagnosticSeries CSV")->required();
  plot->add_option("--cols", cols, "Comma-separated column names")->required();
  plot->add_option("-o,--output", out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*verify) return cmd_verify(suite, json_only);
    if (*plot) {
      geoflow::plot_csv(csv, split_columns(cols), out);
      return kExitOk;
    }
  } catch (const geoflow::Error& e) {
    std::cerr << "geoflow: " << e.what() << "\n";
    return e.kind() == geoflow::ErrorKind::Config ? kExitConfig : kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "geoflow: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
