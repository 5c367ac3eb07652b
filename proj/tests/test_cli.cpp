#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "geoflow/curve.hpp"
#include "geoflow/series.hpp"

namespace fs = std::filesystem;
using geoflow::DiagnosticSeries;

namespace {

const fs::path kConfigs = GEOFLOW_CONFIGS;

fs::path scratch() {
  static const fs::path root = [] {
    const fs::path p = fs::temp_directory_path() / ("geoflow_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Result cli(const std::string& args, const fs::path& out_dir = {}) {
  static int counter = 0;
  const std::string tag = std::to_string(++counter);
  const fs::path out = scratch() / ("stdout_" + tag), err = scratch() / ("stderr_" + tag);
  std::string cmd;
  if (!out_dir.empty()) cmd += "GEOFLOW_OUT='" + out_dir.string() + "' ";
  else cmd += "GEOFLOW_OUT='" + (scratch() / "default").string() + "' ";
  cmd += "'" GEOFLOW_CLI "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const nlohmann::json& j) {
  const fs::path p = scratch() / (name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

nlohmann::json load_config(const std::string& file) { return nlohmann::json::parse(slurp(kConfigs / file)); }

DiagnosticSeries read_series(const fs::path& p) {
  std::ifstream is(p);
  return DiagnosticSeries::read_csv(is);
}

}  // namespace

TEST_CASE("run writes artifacts and a report") {
  const fs::path dir = scratch() / "circle";
  const Result r = cli("run '" + (kConfigs / "csf_circle.json").string() + "'", dir);
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["termination"] == "extinction");
  CHECK(nlohmann::json::parse(r.out) == report);
  for (const auto& a : report["artifacts"]) {
    CHECK(a["complete"] == true);
    CHECK(fs::exists(a["path"].get<std::string>()));
  }
  const DiagnosticSeries s = read_series(dir / "series.csv");
  CHECK(s.has_column("length"));
  CHECK(s.rows() > 2);
  std::ifstream c(dir / "final_curve.csv");
  CHECK(geoflow::read_curve_csv(c).size() == 128);
  for (const auto& inv : report["invariants"]) CHECK(inv["pass"] == true);
  // No temporary files are left behind.
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("every example config runs") {
  for (const char* file : {"csf_avoidance.json", "csf_ellipse.json", "mcf_graph.json", "heat_entropy.json",
                           "ricci_torus.json", "fisher_families.json", "mse_scherk.json"}) {
    CAPTURE(file);
    const Result r = cli("run '" + (kConfigs / file).string() + "'", scratch() / "examples" / file);
    CHECK(r.code == 0);
  }
}

TEST_CASE("artifacts are bit-identical across runs") {
  for (const char* file : {"csf_avoidance.json", "fisher_families.json", "mse_scherk.json", "heat_entropy.json"}) {
    CAPTURE(file);
    const fs::path a = scratch() / "det_a" / file, b = scratch() / "det_b" / file;
    REQUIRE(cli("run '" + (kConfigs / file).string() + "'", a).code == 0);
    REQUIRE(cli("run '" + (kConfigs / file).string() + "'", b).code == 0);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().filename() == "report.json") continue;
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
      ++compared;
    }
    CHECK(compared >= 1);
  }
}

TEST_CASE("random initial data depends only on the seed") {
  nlohmann::json j = load_config("heat_entropy.json");
  j["initial"] = {{"name", "random"}, {"mean", 2.0}, {"amplitude", 0.2}};
  j["seed"] = 11;
  const fs::path cfg = write_config("heat_random", j);
  REQUIRE(cli("run '" + cfg.string() + "'", scratch() / "rand_a").code == 0);
  REQUIRE(cli("run '" + cfg.string() + "'", scratch() / "rand_b").code == 0);
  CHECK(slurp(scratch() / "rand_a" / "initial_field.csv") == slurp(scratch() / "rand_b" / "initial_field.csv"));
  j["seed"] = 12;
  REQUIRE(cli("run '" + write_config("heat_random2", j).string() + "'", scratch() / "rand_c").code == 0);
  CHECK(slurp(scratch() / "rand_a" / "initial_field.csv") != slurp(scratch() / "rand_c" / "initial_field.csv"));
}

TEST_CASE("output directory override") {
  nlohmann::json j = load_config("mcf_graph.json");
  j["output_dir"] = (scratch() / "configured").string();
  const fs::path cfg = write_config("mcf_dir", j);
  const std::string cmd = "GEOFLOW_OUT= '" GEOFLOW_CLI "' run '" + cfg.string() + "' >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(scratch() / "configured" / "report.json"));
  REQUIRE(cli("run '" + cfg.string() + "'", scratch() / "overridden").code == 0);
  CHECK(fs::exists(scratch() / "overridden" / "report.json"));
}

TEST_CASE("config errors exit with 2") {
  nlohmann::json j = load_config("ricci_torus.json");
  j["kind"] = "ricci3d";
  Result r = cli("run '" + write_config("bad_kind", j).string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("kind") != std::string::npos);

  j = load_config("heat_entropy.json");
  j["policy"]["cfl_factor"] = 2.0;
  r = cli("run '" + write_config("bad_cfl", j).string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("policy.cfl_factor") != std::string::npos);

  j = load_config("heat_entropy.json");
  j["resample_every"] = 3;
  CHECK(cli("run '" + write_config("bad_key", j).string() + "'").code == 2);

  j = load_config("heat_entropy.json");
  j["spec_version"] = "2";
  CHECK(cli("run '" + write_config("bad_version", j).string() + "'").code == 2);

  std::ofstream(scratch() / "broken.json") << "{\"kind\": ";
  CHECK(cli("run '" + (scratch() / "broken.json").string() + "'").code == 2);
  CHECK(cli("run '" + (scratch() / "missing.json").string() + "'").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("solver errors exit with 3 and keep a report") {
  nlohmann::json j = load_config("heat_entropy.json");
  j["initial"] = {{"name", "sine"}, {"mean", 0.0}, {"amplitude", 0.5}};
  const fs::path dir = scratch() / "negative";
  const Result r = cli("run '" + write_config("negative", j).string() + "'", dir);
  CHECK(r.code == 3);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["termination"] == "error");
  CHECK(report["error"]["kind"] == "positivity");
}

TEST_CASE("failed invariants exit with 4") {
  const Result r = cli("run '" + (kConfigs / "delta_kernel.json").string() + "'", scratch() / "delta");
  CHECK(r.code == 4);
  CHECK(r.err.find("delta_gauss_limit") != std::string::npos);
}

TEST_CASE("verify") {
  const fs::path dir = scratch() / "verify";
  Result r = cli("verify mse_solver", dir);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PASS [15]", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "verify_summary.json"));
  CHECK(summary.dump().find("mse_solver") != std::string::npos);

  r = cli("verify mse_solver --json", dir);
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out) == nlohmann::json::parse(slurp(dir / "verify_summary.json")));

  r = cli("verify curve_flow", dir);
  CHECK(r.code == 2);
}

TEST_CASE("plot") {
  DiagnosticSeries s({"energy", "l2"});
  for (int i = 0; i < 5; ++i) s.append(0.1 * i, {1.0 / (1 + i), 2.0 - 0.1 * i});
  const fs::path csv = scratch() / "series.csv";
  {
    std::ofstream os(csv);
    s.write_csv(os);
  }
  auto count = [](const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
    return n;
  };
  const fs::path one = scratch() / "one.svg", two = scratch() / "two.svg";
  CHECK(cli("plot '" + csv.string() + "' --cols energy -o '" + one.string() + "'").code == 0);
  const std::string svg1 = slurp(one);
  CHECK(svg1.rfind("<svg", 0) == 0);
  CHECK(count(svg1, "<polyline") == 1);
  CHECK(count(svg1, "class=\"legend\"") == 0);

  CHECK(cli("plot '" + csv.string() + "' --cols energy,l2 -o '" + two.string() + "'").code == 0);
  const std::string svg2 = slurp(two);
  CHECK(count(svg2, "<polyline") == 2);
  CHECK(count(svg2, "class=\"legend\"") == 1);

  std::ofstream(scratch() / "empty.csv") << "";
  CHECK(cli("plot '" + (scratch() / "empty.csv").string() + "' --cols energy -o '" + one.string() + "'").code == 2);
  CHECK(cli("plot '" + csv.string() + "' --cols nope -o '" + one.string() + "'").code == 2);
  CHECK(cli("plot '" + csv.string() + "' -o '" + one.string() + "'").code == 2);
}
