#include "geoflow/scenario.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "geoflow/csf.hpp"
#include "geoflow/curve.hpp"
#include "geoflow/error.hpp"
#include "geoflow/field.hpp"
#include "geoflow/fisher.hpp"
#include "geoflow/heat.hpp"
#include "geoflow/kernel.hpp"
#include "geoflow/mcf_graph.hpp"
#include "geoflow/mse.hpp"
#include "geoflow/ricci2d.hpp"

namespace geoflow {
namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kKinds = {"csf", "mcf_graph", "heat", "ricci2d", "fisher", "mse", "delta"};

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, "field '" + field + "': " + msg);
}

// Typed, path-aware view of a JSON object.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) config_error(field(k), "unknown key");
  }

  double num(const std::string& key, double def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) config_error(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(field(key), "must be finite");
    return d;
  }
  double positive(const std::string& key, double def) const {
    const double d = num(key, def);
    if (!(d > 0.0)) config_error(field(key), "must be positive");
    return d;
  }
  std::size_t count(const std::string& key, std::size_t def, std::size_t lo, std::size_t hi) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) config_error(field(key), "expected a non-negative integer");
    const auto n = v.get<std::size_t>();
    if (n < lo || n > hi)
      config_error(field(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return n;
  }
  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) config_error(field(key), "expected a string");
    return v.get<std::string>();
  }
  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) config_error(field(key), "expected true or false");
    return v.get<bool>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) const {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) config_error(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) config_error(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  Vec2 point(const std::string& key) const {
    const std::vector<double> v = numbers(key, {0.0, 0.0});
    if (v.size() != 2) config_error(field(key), "expected [x, y]");
    return {v[0], v[1]};
  }

 private:
  const json& j_;
  std::string path_;
};

std::string csv_of(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

// Collects artifacts for one run.
class Output {
 public:
  Output(std::filesystem::path dir, RunReport& report) : dir_(std::move(dir)), report_(report) {}

  std::string write(const std::string& role, const std::string& file, const std::string& content) {
    const std::filesystem::path p = dir_ / file;
    write_atomic(p, content);
    report_.artifacts.push_back({role, p.string(), true});
    return p.string();
  }
  void mark_incomplete() {
    for (Artifact& a : report_.artifacts) a.complete = false;
  }

 private:
  std::filesystem::path dir_;
  RunReport& report_;
};

double max_increase(const std::vector<double>& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!std::isnan(v[i]) && !std::isnan(v[i - 1])) worst = std::max(worst, v[i] - v[i - 1]);
  return worst;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void add_invariant(RunReport& r, const std::string& name, bool pass, const std::string& detail) {
  r.invariants.push_back({name, pass, detail});
}

void check_nonincreasing(RunReport& r, const std::string& name, const std::vector<double>& v, double tol) {
  const double inc = max_increase(v);
  add_invariant(r, name, !(inc > tol), "max step increase " + fmt(inc) + ", tolerance " + fmt(tol));
}

// Initial scalar fields shared by the grid kinds.
struct FieldSpec {
  std::string name;
  std::function<double(double, double)> fn;
  double slope_x = 0.0;
  double slope_y = 0.0;
};

double periodic_gaussian(double x, double sigma) {
  double s = 0.0;
  for (int k = -2; k <= 2; ++k) {
    const double d = x - 0.5 - k;
    s += std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return s;
}

FieldSpec field_spec(const Obj& o, std::size_t dim, double default_mean, std::uint64_t seed,
                     const std::string& default_name, const std::set<std::string>& names) {
  FieldSpec s;
  s.name = o.str("name", default_name);
  if (!names.count(s.name)) {
    std::string list;
    for (const std::string& n : names) list += (list.empty() ? "" : ", ") + n;
    config_error(o.field("name"), "unknown initial data \"" + s.name + "\" (expected one of " + list + ")");
  }
  const bool two = dim == 2;
  if (s.name == "constant") {
    o.allow({"name", "value"});
    const double c = o.num("value", default_mean);
    s.fn = [c](double, double) { return c; };
  } else if (s.name == "sine") {
    o.allow({"name", "mean", "amplitude", "mode"});
    const double m = o.num("mean", default_mean), a = o.num("amplitude", 0.5);
    const double k = 2.0 * kPi * static_cast<double>(o.count("mode", 1, 1, 64));
    s.fn = [=](double x, double y) { return m + a * std::sin(k * x) * (two ? std::sin(k * y) : 1.0); };
  } else if (s.name == "sine_product") {
    o.allow({"name", "amplitude"});
    const double a = o.num("amplitude", 0.3);
    s.fn = [a](double x, double y) { return a * std::sin(2 * kPi * x) * std::cos(2 * kPi * y); };
  } else if (s.name == "two_mode") {
    o.allow({"name", "mean", "a1", "a2"});
    const double m = o.num("mean", default_mean), a1 = o.num("a1", 0.3), a2 = o.num("a2", 0.2);
    s.fn = [=](double x, double) { return m + a1 * std::sin(2 * kPi * x) + a2 * std::cos(4 * kPi * x); };
  } else if (s.name == "bump") {
    o.allow({"name", "floor", "sigma"});
    const double fl = o.num("floor", 1e-3), sg = o.positive("sigma", 0.02);
    s.fn = [=](double x, double y) { return fl + periodic_gaussian(x, sg) * (two ? periodic_gaussian(y, sg) : 1.0); };
  } else if (s.name == "square_wave") {
    o.allow({"name"});
    s.fn = [two](double x, double y) { return (x < 0.5 ? 1.0 : -1.0) * (two && y >= 0.5 ? -1.0 : 1.0); };
  } else if (s.name == "affine") {
    o.allow({"name", "ax", "ay"});
    s.slope_x = o.num("ax", 0.3);
    s.slope_y = two ? o.num("ay", 0.1) : 0.0;
    s.fn = [](double, double) { return 0.0; };
  } else if (s.name == "random") {
    o.allow({"name", "mean", "amplitude", "modes"});
    const double m = o.num("mean", default_mean), a = o.num("amplitude", 0.1);
    const std::size_t modes = o.count("modes", 3, 1, 16);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::array<double, 4>> c(modes);
    for (auto& row : c)
      for (double& v : row) v = u(rng);
    s.fn = [=](double x, double y) {
      double v = m;
      for (std::size_t k = 1; k <= modes; ++k) {
        const double w = 2.0 * kPi * static_cast<double>(k), s2 = a / static_cast<double>(k * k);
        const auto& r = c[k - 1];
        v += s2 * (r[0] * std::sin(w * x) + r[1] * std::cos(w * x));
        if (two) v += s2 * (r[2] * std::sin(w * y) + r[3] * std::cos(w * y));
      }
      return v;
    };
  }
  return s;
}

ScalarField make_field(const FieldSpec& s, std::size_t n, std::size_t dim) {
  if (dim == 1) return ScalarField::one_d(n, 1.0, [&](double x) { return s.fn(x, 0.0); }, s.slope_x);
  return ScalarField::two_d(n, 1.0, s.fn, s.slope_x, s.slope_y);
}

std::size_t grid_dim(const Obj& root) { return root.count("dim", 1, 1, 2); }

// ---------------------------------------------------------------- csf

ClosedCurve build_curve(const Obj& o, std::size_t n) {
  const std::string name = o.str("name", "circle");
  if (name == "circle") {
    o.allow({"name", "radius", "center"});
    return make_circle(o.positive("radius", 1.0), n, o.point("center"));
  }
  if (name == "ellipse") {
    o.allow({"name", "a", "b", "center"});
    return make_ellipse(o.positive("a", 2.0), o.positive("b", 1.0), n, o.point("center"));
  }
  if (name == "csv") {
    o.allow({"name", "path"});
    const std::string path = o.str("path", "");
    std::ifstream is(path);
    if (!is) config_error(o.field("path"), "cannot open \"" + path + "\"");
    return read_curve_csv(is);
  }
  config_error(o.field("name"), "unknown curve \"" + name + "\" (expected circle, ellipse or csv)");
}

bool is_builtin_convex(const Obj& o) {
  const std::string name = o.str("name", "circle");
  return name == "circle" || name == "ellipse";
}

void run_csf(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
             const std::function<void()>& run_guard_begin) {
  const Obj init(c.initial, "initial");
  CsfRunConfig cfg(build_curve(init, c.resolution ? c.resolution : 256));
  cfg.t_end = c.t_end;
  if (c.cfl_factor > 0.0) cfg.policy.cfl_factor = c.cfl_factor;
  cfg.policy.resample_every = extra.count("resample_every", 10, 1, 1000);
  cfg.sample_every = c.sample_every ? c.sample_every : 50;
  cfg.residuals = extra.flag("residuals", true);
  bool partner_convex = true;
  if (extra.has("partner")) {
    const Obj p(extra.raw("partner"), "partner");
    cfg.partner = build_curve(p, c.resolution ? c.resolution : 256);
    partner_convex = is_builtin_convex(p);
  }
  if (extra.has("huisken")) {
    const json& h = extra.raw("huisken");
    if (h.is_string() && h.get<std::string>() == "auto") {
      Vec2 centroid;
      for (const Vec2& p : cfg.initial.nodes()) centroid += p;
      centroid *= 1.0 / static_cast<double>(cfg.initial.size());
      cfg.huisken = HuiskenCenter{centroid, enclosed_area(cfg.initial) / (2.0 * kPi)};
    } else {
      const Obj ho(h, "huisken");
      ho.allow({"x0", "t0"});
      cfg.huisken = HuiskenCenter{ho.point("x0"), ho.positive("t0", 1.0)};
    }
  }

  std::vector<std::string> known = csf_series_columns();
  known.push_back("min_distance");
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by csf runs");

  out.write("initial_curve", "initial_curve.csv", csv_of([&](std::ostream& os) { write_curve_csv(os, cfg.initial); }));
  run_guard_begin();
  const CsfRunResult res = run(cfg);
  const std::string series =
      out.write("series", "series.csv", csv_of([&](std::ostream& os) { res.series.write_csv(os); }));
  out.write("final_curve", "final_curve.csv",
            csv_of([&](std::ostream& os) { write_curve_csv(os, res.final_state.curve); }));
  if (res.final_partner)
    out.write("final_partner_curve", "final_partner_curve.csv",
              csv_of([&](std::ostream& os) { write_curve_csv(os, res.final_partner->curve); }));

  const std::vector<std::string> wanted = c.diagnostics.empty() ? known : c.diagnostics;
  for (const std::string& d : wanted) {
    std::string where = series;
    if (d == "min_distance" && !cfg.partner) where = "skipped: no partner curve configured";
    if (d == "huisken" && !cfg.huisken) where = "skipped: no huisken center configured";
    if ((d == "len_residual" || d == "kappa_residual") && !cfg.residuals) where = "skipped: residuals disabled";
    rep.diagnostics.emplace_back(d, where);
  }

  rep.termination = res.extinct ? "extinction" : "t_end";
  rep.scenario["result"] = {{"end_time", res.end_time}, {"steps", res.steps}, {"extinct", res.extinct}};

  const std::vector<double> len = res.series.column("length");
  add_invariant(rep, "length_strictly_decreasing", max_increase(len) < 0.0,
                "max step change " + fmt(max_increase(len)));
  const bool convex = is_builtin_convex(init) && partner_convex;
  if (convex) {
    check_nonincreasing(rep, "iso_sup_nonincreasing", res.series.column("iso_sup"), 1e-6);
    const std::vector<double> area = res.series.column("area");
    const std::vector<double>& t = res.series.times();
    double worst = 0.0;
    for (std::size_t i = 1; i < area.size(); ++i)
      worst = std::max(worst, std::abs((area[i] - area[i - 1]) / (t[i] - t[i - 1]) + 2.0 * kPi));
    add_invariant(rep, "area_rate_minus_2pi", worst <= 5e-2, "max |dA/dt + 2 pi| " + fmt(worst) + ", tolerance 0.05");
  }
  if (cfg.huisken) check_nonincreasing(rep, "huisken_nonincreasing", res.series.column("huisken"), 1e-6);
  if (cfg.partner) {
    const std::vector<double> d = res.series.column("min_distance");
    const double worst = *std::min_element(d.begin(), d.end()) - d.front();
    add_invariant(rep, "avoidance", worst >= -1e-3, "min distance change " + fmt(worst) + ", tolerance -1e-3");
  }
  if (res.extinct) {
    const std::vector<double> k = res.series.column("sup_abs_kappa");
    add_invariant(rep, "curvature_blows_up", k.back() >= 10.0 * k.front(),
                  "final / initial sup|kappa| = " + fmt(k.back() / k.front()));
  }
}

// ---------------------------------------------------------------- mcf_graph

void run_mcf(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
             const std::function<void()>& run_guard_begin) {
  const Obj init(c.initial, "initial");
  const std::size_t dim = grid_dim(extra);
  const std::size_t n = c.resolution ? c.resolution : 64;
  if (dim == 2 && n > 512) config_error("resolution", "2D grids are limited to 512 points per axis");
  const FieldSpec spec = field_spec(init, dim, 0.0, c.seed, "sine", {"sine", "affine", "bump", "constant", "random", "sine_product", "two_mode"});
  ScalarField f = make_field(spec, n, dim);
  const double cfl = c.cfl_factor > 0.0 ? c.cfl_factor : kGraphMcfCfl;
  if (cfl > kGraphMcfCfl) config_error("policy.cfl_factor", "graph MCF needs cfl_factor <= 0.2");
  const std::vector<std::string> known = {"area", "sup_u", "inf_u"};
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by mcf_graph runs");

  out.write("initial_field", "initial_field.csv", csv_of([&](std::ostream& os) { f.write_csv(os); }));
  run_guard_begin();
  DiagnosticSeries series(known);
  auto row = [&](const ScalarField& g) { return std::vector<double>{graph_area(g), g.max(), g.min()}; };
  series.append(0.0, row(f));
  const double dt = cfl * f.h() * f.h();
  const std::size_t every = c.sample_every ? c.sample_every : 10;
  double t = 0.0;
  std::size_t steps = 0;
  auto flush = [&] {
    return out.write("series", "series.csv", csv_of([&](std::ostream& os) { series.write_csv(os); }));
  };
  try {
    while (t < c.t_end) {
      const bool last = dt >= c.t_end - t;
      f = step_graph_mcf(f, last ? c.t_end - t : dt);
      t = last ? c.t_end : t + dt;
      ++steps;
      if (steps % every == 0 || last) series.append(t, row(f));
    }
  } catch (const Error&) {
    flush();
    throw;
  }
  const std::string path = flush();
  out.write("final_field", "final_field.csv", csv_of([&](std::ostream& os) { f.write_csv(os); }));
  for (const std::string& d : c.diagnostics.empty() ? known : c.diagnostics) rep.diagnostics.emplace_back(d, path);
  rep.termination = "t_end";
  rep.scenario["result"] = {{"end_time", t}, {"steps", steps}};
  check_nonincreasing(rep, "area_nonincreasing", series.column("area"), 1e-13);
  check_nonincreasing(rep, "sup_nonincreasing", series.column("sup_u"), 1e-14);
  std::vector<double> neg_inf = series.column("inf_u");
  for (double& v : neg_inf) v = -v;
  check_nonincreasing(rep, "inf_nondecreasing", neg_inf, 1e-14);
}

// ---------------------------------------------------------------- heat

void run_heat_kind(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
                   const std::function<void()>& run_guard_begin) {
  const Obj init(c.initial, "initial");
  const std::size_t dim = grid_dim(extra);
  const std::size_t n = c.resolution ? c.resolution : 256;
  if (dim == 2 && n > 512) config_error("resolution", "2D grids are limited to 512 points per axis");
  const FieldSpec spec =
      field_spec(init, dim, 1.0, c.seed, "sine", {"sine", "bump", "constant", "random", "square_wave", "two_mode"});
  HeatRunConfig cfg(make_field(spec, n, dim));
  cfg.t_end = c.t_end;
  if (c.cfl_factor > 0.0) cfg.cfl_factor = c.cfl_factor;
  cfg.sample_every = c.sample_every ? c.sample_every : 10;
  const std::vector<std::string>& known = heat_series_columns();
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by heat runs");
  const std::vector<std::string> wanted = c.diagnostics.empty() ? known : c.diagnostics;
  cfg.information = std::any_of(wanted.begin(), wanted.end(),
                                [](const std::string& d) { return d == "entropy" || d == "fisher" || d == "liyau_min"; });

  out.write("initial_field", "initial_field.csv", csv_of([&](std::ostream& os) { cfg.initial.write_csv(os); }));
  run_guard_begin();
  const HeatRunResult res = run_heat(cfg);
  const std::string path = out.write("series", "series.csv", csv_of([&](std::ostream& os) { res.series.write_csv(os); }));
  out.write("final_field", "final_field.csv", csv_of([&](std::ostream& os) { res.final_state.field.write_csv(os); }));
  for (const std::string& d : wanted) rep.diagnostics.emplace_back(d, path);
  rep.termination = "t_end";
  rep.scenario["result"] = {{"end_time", res.final_state.time}, {"steps", res.steps}};

  for (const char* col : {"l2", "energy", "entropy", "fisher"}) {
    if (std::find(wanted.begin(), wanted.end(), col) == wanted.end()) continue;
    check_nonincreasing(rep, std::string(col) + "_nonincreasing", res.series.column(col), 0.0);
  }
  if (cfg.information) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : res.series.column("liyau_min"))
      if (!std::isnan(v)) m = std::min(m, v);
    add_invariant(rep, "li_yau_nonnegative", m >= -1e-6, "grid minimum " + fmt(m) + ", tolerance -1e-6");
  }
  const double drift = std::abs(res.final_state.field.integral() - cfg.initial.integral());
  const double allowed = 1e-12 * static_cast<double>(std::max<std::size_t>(res.steps, 1));
  add_invariant(rep, "mass_conserved", drift <= allowed, "total drift " + fmt(drift) + ", tolerance " + fmt(allowed));
  add_invariant(rep, "maximum_principle",
                res.final_state.field.max() <= cfg.initial.max() && res.final_state.field.min() >= cfg.initial.min(),
                "final range [" + fmt(res.final_state.field.min()) + ", " + fmt(res.final_state.field.max()) + "]");
}

// ---------------------------------------------------------------- ricci2d

void run_ricci_kind(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
                    const std::function<void()>& run_guard_begin) {
  (void)extra;
  const Obj init(c.initial, "initial");
  const std::size_t n = c.resolution ? c.resolution : 32;
  if (n > 256) config_error("resolution", "ricci2d grids are limited to 256 points per axis");
  const FieldSpec spec = field_spec(init, 2, 0.0, c.seed, "sine_product", {"sine_product", "sine", "random", "constant"});
  RicciRunConfig cfg(make_conformal_metric(n, spec.fn));
  cfg.t_end = c.t_end;
  if (c.cfl_factor > 0.0) cfg.cfl_factor = c.cfl_factor;
  cfg.sample_every = c.sample_every ? c.sample_every : 100;
  const std::vector<std::string>& known = ricci_series_columns();
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by ricci2d runs");

  out.write("initial_u", "initial_u.csv", csv_of([&](std::ostream& os) { cfg.initial.u.write_csv(os); }));
  run_guard_begin();
  const RicciRunResult res = run_ricci(cfg);
  const std::string path = out.write("series", "series.csv", csv_of([&](std::ostream& os) { res.series.write_csv(os); }));
  out.write("final_u", "final_u.csv", csv_of([&](std::ostream& os) { res.final_metric.u.write_csv(os); }));
  for (const std::string& d : c.diagnostics.empty() ? known : c.diagnostics) rep.diagnostics.emplace_back(d, path);
  rep.termination = "t_end";
  rep.scenario["result"] = {{"end_time", c.t_end}, {"steps", res.steps}};

  const std::vector<double> m = res.series.column("total_R_measure");
  double drift = 0.0;
  for (double v : m) drift = std::max(drift, std::abs(v - m.front()));
  add_invariant(rep, "total_curvature_conserved", drift <= 1e-10, "max drift " + fmt(drift) + ", tolerance 1e-10");
  const std::vector<double> rmin = res.series.column("min_R");
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rmin.size(); ++i)
    gap = std::min(gap, rmin[i] - curvature_ode_oracle(rmin.front(), res.series.times()[i]));
  add_invariant(rep, "min_R_ode_bound", gap >= -1e-4, "min over samples of R_min - bound: " + fmt(gap));
}

// ---------------------------------------------------------------- fisher

Params random_theta(const DiscreteFamily& fam, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (;;) {
    Params t(static_cast<Eigen::Index>(fam.dim));
    if (fam.name.rfind("categorical", 0) == 0) {
      Eigen::VectorXd w(static_cast<Eigen::Index>(fam.dim + 1));
      for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = u(rng);
      w /= w.sum();
      t = w.head(static_cast<Eigen::Index>(fam.dim));
    } else {
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = u(rng);
    }
    if (fam.admissible(t)) return t;
  }
}

void run_fisher(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
                const std::function<void()>& run_guard_begin) {
  struct Case {
    DiscreteFamily family;
    Params theta;
  };
  std::vector<Case> cases;
  std::mt19937_64 rng(c.seed);
  const std::size_t draws = extra.count("random_draws", 0, 0, 1000);
  const std::vector<double> coeffs = extra.numbers("coefficients", {-0.2, -0.1, -0.05, 0.05, 0.1, 0.2});
  if (!extra.has("families")) config_error("families", "fisher scenarios need a families list");
  const json& fams = extra.raw("families");
  if (!fams.is_array() || fams.empty()) config_error("families", "expected a non-empty array");
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const Obj f(fams[i], "families[" + std::to_string(i) + "]");
    f.allow({"family", "theta"});
    DiscreteFamily fam;
    try {
      fam = family_by_name(f.str("family", ""));
    } catch (const Error& e) {
      config_error(f.field("family"), e.what());
    }
    if (fam.size() > 4096) config_error(f.field("family"), "sample space larger than 4096 outcomes");
    if (f.has("theta")) {
      const std::vector<double> t = f.numbers("theta", {});
      if (t.size() != fam.dim) config_error(f.field("theta"), "expected " + std::to_string(fam.dim) + " values");
      Params p = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
      if (!fam.admissible(p)) config_error(f.field("theta"), "outside the admissible region");
      cases.push_back({fam, p});
    }
    for (std::size_t d = 0; d < draws; ++d) cases.push_back({fam, random_theta(fam, rng)});
  }
  const std::vector<std::string> known = {"fisher", "gap_min_eigenvalue", "score_expectation_max_abs"};
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by fisher runs");
  run_guard_begin();
  json records = json::array();
  double worst_score = 0.0, worst_fisher = std::numeric_limits<double>::infinity(),
         worst_gap = std::numeric_limits<double>::infinity();
  for (const Case& cs : cases) {
    const Eigen::MatrixXd g = fisher_matrix(cs.family, cs.theta);
    const double es = score_expectation(cs.family, cs.theta).cwiseAbs().maxCoeff();
    double gap = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
    if (cs.family.size() <= 16) {
      const Estimator base{"natural", cs.family.natural_estimator()};
      for (const Estimator& e : unbiased_estimator_grid(cs.family, cs.theta, base, coeffs)) {
        gap = std::min(gap, min_eigenvalue(cramer_rao_gap(cs.family, e, cs.theta)));
        ++count;
      }
    } else {
      gap = min_eigenvalue(cramer_rao_gap(cs.family, {"natural", cs.family.natural_estimator()}, cs.theta));
      count = 1;
    }
    json gm = json::array();
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index k = 0; k < g.cols(); ++k) row.push_back(g(r, k));
      gm.push_back(row);
    }
    records.push_back({{"family", cs.family.name},
                       {"theta", std::vector<double>(cs.theta.data(), cs.theta.data() + cs.theta.size())},
                       {"fisher", gm},
                       {"gap_min_eigenvalue", gap},
                       {"estimators", count},
                       {"score_expectation_max_abs", es}});
    worst_score = std::max(worst_score, es);
    worst_fisher = std::min(worst_fisher, min_eigenvalue(g));
    worst_gap = std::min(worst_gap, gap);
  }
  const std::string path = out.write("fisher_report", "fisher_report.json", records.dump(2) + "\n");
  for (const std::string& d : c.diagnostics.empty() ? known : c.diagnostics) rep.diagnostics.emplace_back(d, path);
  rep.termination = "t_end";
  add_invariant(rep, "score_mean_zero", worst_score <= 1e-12, "max |E[score]| " + fmt(worst_score));
  add_invariant(rep, "fisher_psd", worst_fisher >= -1e-12, "min eigenvalue " + fmt(worst_fisher));
  add_invariant(rep, "cramer_rao_gap_psd", worst_gap >= -1e-10, "min gap eigenvalue " + fmt(worst_gap));
}

// ---------------------------------------------------------------- mse

void run_mse(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
             const std::function<void()>& run_guard_begin) {
  const Obj init(c.initial, "initial");
  const std::size_t n = c.resolution ? c.resolution : 64;
  if (n > 512) config_error("resolution", "mse grids are limited to 512 cells per axis");
  const std::string name = init.str("name", "scherk");
  std::function<double(double, double)> g;
  double lo = 0.0, hi = 1.0;
  std::function<double(double, double)> exact;
  if (name == "scherk") {
    init.allow({"name", "extent"});
    const double e = init.positive("extent", 1.2);
    if (e >= kPi / 2) config_error(init.field("extent"), "must be below pi/2");
    lo = -e;
    hi = e;
    g = [](double x, double y) { return std::log(std::cos(x) / std::cos(y)); };
    exact = g;
  } else if (name == "affine") {
    init.allow({"name", "ax", "ay"});
    const double ax = init.num("ax", 0.3), ay = init.num("ay", 0.1);
    g = [=](double x, double y) { return ax * x + ay * y; };
    exact = g;
  } else if (name == "zero") {
    init.allow({"name"});
    g = [](double, double) { return 0.0; };
    exact = g;
  } else if (name == "saddle") {
    init.allow({"name", "amplitude"});
    const double a = init.num("amplitude", 0.2);
    lo = -1.0;
    g = [a](double x, double y) { return a * (x * x - y * y); };
  } else {
    config_error(init.field("name"), "unknown boundary data \"" + name + "\" (expected scherk, affine, zero or saddle)");
  }
  const double tol = extra.positive("tolerance", 1e-8);
  const std::size_t n_eta = extra.count("random_eta", 20, 0, 1000);
  const std::size_t n_comp = extra.count("competitors", 20, 0, 1000);
  const std::vector<std::string> known = {"residual", "step_length", "area", "first_variation"};
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by mse runs");

  const GraphProblem problem = GraphProblem::from_function(lo, hi, lo, hi, n, g);
  out.write("boundary", "boundary.csv", csv_of([&](std::ostream& os) { problem.data.write_boundary_csv(os); }));
  run_guard_begin();
  const MseSolution sol = solve_mse(problem, tol);
  DiagnosticSeries newton({"residual", "step_length"});
  for (std::size_t k = 0; k < sol.residual_history.size(); ++k)
    newton.append(static_cast<double>(k),
                  {sol.residual_history[k], k < sol.step_lengths.size() ? sol.step_lengths[k] : kMissing});
  const std::string npath = out.write("newton", "newton.csv", csv_of([&](std::ostream& os) { newton.write_csv(os); }));
  const std::string spath = out.write("solution", "solution.csv", csv_of([&](std::ostream& os) { sol.field.write_csv(os); }));

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_var = 0.0;
  for (std::size_t t = 0; t < n_eta; ++t) {
    RectangleField eta = sol.field;
    double nrm = 0.0;
    for (std::size_t j = 0; j <= eta.ny; ++j)
      for (std::size_t i = 0; i <= eta.nx; ++i) {
        eta(i, j) = eta.on_boundary(i, j) ? 0.0 : u(rng);
        nrm += eta(i, j) * eta(i, j) * eta.h * eta.h;
      }
    worst_var = std::max(worst_var, std::abs(first_variation(sol.field, eta)) / std::sqrt(nrm));
  }
  const double a_sol = area(sol.field);
  double worst_gain = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n_comp; ++t) {
    // Smooth interior perturbation vanishing on the boundary.
    const double amp = 0.05 * u(rng), kx = 1.0 + std::floor(3.0 * std::abs(u(rng))), ky = 1.0 + std::floor(3.0 * std::abs(u(rng)));
    RectangleField comp = sol.field;
    for (std::size_t j = 0; j <= comp.ny; ++j)
      for (std::size_t i = 0; i <= comp.nx; ++i) {
        const double sx = (comp.x(i) - lo) / (hi - lo), sy = (comp.y(j) - lo) / (hi - lo);
        comp(i, j) += amp * std::sin(kPi * kx * sx) * std::sin(kPi * ky * sy);
      }
    worst_gain = std::min(worst_gain, area(comp) - a_sol);
  }
  json extra_out = {{"iterations", sol.iterations}, {"residual", sol.residual}, {"area", a_sol}};
  if (exact) {
    double err = 0.0;
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t i = 0; i <= n; ++i) err = std::max(err, std::abs(sol.field(i, j) - exact(sol.field.x(i), sol.field.y(j))));
    extra_out["max_error_vs_closed_form"] = err;
  }
  rep.scenario["result"] = extra_out;
  for (const std::string& d : c.diagnostics.empty() ? known : c.diagnostics) {
    if (d == "residual" || d == "step_length")
      rep.diagnostics.emplace_back(d, npath);
    else
      rep.diagnostics.emplace_back(d, "reported in report.json result; field in " + spath);
  }
  rep.termination = "t_end";
  add_invariant(rep, "residual_below_tolerance", sol.residual <= tol, "sup residual " + fmt(sol.residual));
  if (n_eta)
    add_invariant(rep, "first_variation_vanishes", worst_var <= 1e-7, "max |A'(0)| / |eta| " + fmt(worst_var));
  if (n_comp)
    add_invariant(rep, "area_minimal_among_competitors", worst_gain >= -1e-9, "min area gain " + fmt(worst_gain));
}

// ---------------------------------------------------------------- delta

void run_delta(const ScenarioConfig& c, const Obj& extra, Output& out, RunReport& rep,
               const std::function<void()>& run_guard_begin) {
  struct Sigma {
    std::string name;
    std::function<double(double)> fn;
    double second_derivative_at_0;
  };
  const std::vector<Sigma> all = {
      {"gauss", [](double x) { return std::exp(-x * x); }, -2.0},
      {"x2gauss", [](double x) { return x * x * std::exp(-x * x); }, 2.0},
      {"zero", [](double) { return 0.0; }, 0.0},
  };
  std::vector<Sigma> sigmas;
  if (extra.has("sigma")) {
    const json& s = extra.raw("sigma");
    if (!s.is_array()) config_error("sigma", "expected an array of names");
    for (const json& x : s) {
      const auto it = std::find_if(all.begin(), all.end(), [&](const Sigma& g) { return x.is_string() && g.name == x.get<std::string>(); });
      if (it == all.end()) config_error("sigma", "unknown test function " + x.dump() + " (expected gauss, x2gauss or zero)");
      sigmas.push_back(*it);
    }
  } else {
    sigmas = {all[0], all[1]};
  }
  std::vector<double> as = extra.numbers("a_values", {1e2, 1e3, 1e4});
  std::vector<double> ks = extra.numbers("k_values", {0.05, 0.1, 0.2, 0.4});
  for (double a : as)
    if (!(a > 0)) config_error("a_values", "entries must be positive");
  for (double k : ks)
    if (!(k > 0)) config_error("k_values", "entries must be positive");
  std::sort(as.begin(), as.end());
  std::sort(ks.begin(), ks.end());
  as.erase(std::unique(as.begin(), as.end()), as.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const std::vector<std::string> known = {"delta_lhs", "kernel_remainder"};
  for (const std::string& d : c.diagnostics)
    if (std::find(known.begin(), known.end(), d) == known.end())
      config_error("diagnostics", "\"" + d + "\" is not produced by delta runs");
  run_guard_begin();

  std::string delta_paths;
  for (const Sigma& s : sigmas) {
    DiagnosticSeries series({"lhs", "target", "abs_error"});
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double last = 0.0;
    for (double a : as) {
      const double v = delta_claim1_lhs(s.fn, a);
      last = std::abs(v - s.second_derivative_at_0);
      monotone = monotone && (last < prev || last == 0.0);
      prev = last;
      series.append(a, {v, s.second_derivative_at_0, last});
    }
    const std::string p = out.write("delta_" + s.name, "delta_" + s.name + ".csv",
                                    csv_of([&](std::ostream& os) { series.write_csv(os); }));
    delta_paths += (delta_paths.empty() ? "" : ",") + p;
    add_invariant(rep, "delta_" + s.name + "_monotone", monotone, "errors shrink as a grows");
    add_invariant(rep, "delta_" + s.name + "_limit", last <= 1e-3,
                  "|lhs - sigma''(0)| = " + fmt(last) + " at a = " + fmt(as.back()) + ", tolerance 1e-3");
  }
  DiagnosticSeries kernel({"expected", "closed_form", "expansion", "remainder", "remainder_over_k3"});
  double quad = 0.0;
  for (double k : ks) {
    const double v = kernel_expected([](double x) { return std::cos(x); }, k);
    const double exact = std::exp(-k * k / 4.0), exp2 = kernel_expansion(1.0, -1.0, k);
    quad = std::max(quad, std::abs(v - exact));
    kernel.append(k, {v, exact, exp2, std::abs(v - exp2), std::abs(v - exp2) / (k * k * k)});
  }
  const std::string kpath = out.write("kernel", "kernel.csv", csv_of([&](std::ostream& os) { kernel.write_csv(os); }));
  const std::vector<double> ratio = kernel.column("remainder_over_k3");
  const double c_fit = ratio.empty() ? 0.0 : ratio.back();
  bool bounded = true;
  for (double r : ratio) bounded = bounded && r <= c_fit * (1.0 + 1e-9);
  add_invariant(rep, "kernel_matches_closed_form", quad <= 1e-10, "max error " + fmt(quad));
  add_invariant(rep, "kernel_remainder_cubic_bound", bounded, "C fitted at the largest k: " + fmt(c_fit));
  for (const std::string& d : c.diagnostics.empty() ? known : c.diagnostics)
    rep.diagnostics.emplace_back(d, d == "delta_lhs" ? delta_paths : kpath);
  rep.termination = "t_end";
}

using Runner = void (*)(const ScenarioConfig&, const Obj&, Output&, RunReport&, const std::function<void()>&);

Runner runner_for(const std::string& kind) {
  if (kind == "csf") return run_csf;
  if (kind == "mcf_graph") return run_mcf;
  if (kind == "heat") return run_heat_kind;
  if (kind == "ricci2d") return run_ricci_kind;
  if (kind == "fisher") return run_fisher;
  if (kind == "mse") return run_mse;
  return run_delta;
}

bool is_flow(const std::string& kind) { return kind == "csf" || kind == "mcf_graph" || kind == "heat" || kind == "ricci2d"; }

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  const Obj root(j, "");
  ScenarioConfig c;
  if (!root.has("spec_version")) config_error("spec_version", "missing");
  const json& v = root.raw("spec_version");
  c.spec_version = v.is_string() ? v.get<std::string>() : v.dump();
  if (c.spec_version != kSpecVersion)
    config_error("spec_version", "unsupported version " + v.dump() + " (expected \"" + kSpecVersion + "\")");
  if (!root.has("kind")) config_error("kind", "missing");
  c.kind = root.str("kind", "");
  if (std::find(kKinds.begin(), kKinds.end(), c.kind) == kKinds.end())
    config_error("kind", "unknown scenario kind \"" + c.kind +
                             "\" (expected one of csf, mcf_graph, heat, ricci2d, fisher, mse, delta)");
  c.name = root.str("name", c.kind);
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    config_error("name", "must be a non-empty plain file name");
  if (root.has("initial")) {
    Obj(root.raw("initial"), "initial");
    c.initial = root.raw("initial");
  }
  const std::size_t lo = c.kind == "csf" ? kMinCurveNodes : kMinGridPoints;
  c.resolution = root.count("resolution", 0, lo, 8192);
  if (root.has("policy")) {
    const Obj p(root.raw("policy"), "policy");
    p.allow({"cfl_factor", "t_end", "sample_every"});
    if (p.has("cfl_factor")) {
      c.cfl_factor = p.num("cfl_factor", 0.0);
      if (!(c.cfl_factor > 0.0 && c.cfl_factor <= 1.0)) config_error("policy.cfl_factor", "must lie in (0, 1]");
    }
    if (p.has("t_end")) c.t_end = p.positive("t_end", 0.0);
    c.sample_every = p.count("sample_every", 0, 1, 100000000);
  }
  if (is_flow(c.kind) && !(c.t_end > 0.0)) config_error("policy.t_end", "flow scenarios need t_end > 0");
  if (root.has("diagnostics")) {
    const json& d = root.raw("diagnostics");
    if (!d.is_array()) config_error("diagnostics", "expected an array of names");
    for (const json& x : d) {
      if (!x.is_string()) config_error("diagnostics", "expected an array of names");
      c.diagnostics.push_back(x.get<std::string>());
    }
  }
  c.output_dir = root.str("output_dir", "");
  if (root.has("seed")) {
    const json& s = root.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      config_error("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  static const std::set<std::string> common = {"spec_version", "kind",        "name",       "initial", "resolution",
                                               "policy",       "diagnostics", "output_dir", "seed"};
  static const std::map<std::string, std::set<std::string>> specific = {
      {"csf", {"partner", "huisken", "residuals", "resample_every"}},
      {"mcf_graph", {"dim"}},
      {"heat", {"dim"}},
      {"ricci2d", {}},
      {"fisher", {"families", "random_draws", "coefficients"}},
      {"mse", {"tolerance", "random_eta", "competitors"}},
      {"delta", {"sigma", "a_values", "k_values"}},
  };
  for (const auto& [k, val] : j.items()) {
    if (common.count(k)) continue;
    if (!specific.at(c.kind).count(k)) config_error(k, "unknown key for kind \"" + c.kind + "\"");
    c.extra[k] = val;
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Config, "cannot open config \"" + path.string() + "\"");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, "config \"" + path.string() + "\" is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json ScenarioConfig::to_json() const {
  json j = {{"spec_version", spec_version},
            {"kind", kind},
            {"name", name},
            {"initial", initial},
            {"resolution", resolution},
            {"policy", {{"cfl_factor", cfl_factor}, {"t_end", t_end}, {"sample_every", sample_every}}},
            {"diagnostics", diagnostics},
            {"output_dir", output_dir},
            {"seed", seed}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

bool RunReport::invariants_pass() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const InvariantResult& r) { return r.pass; });
}

json RunReport::to_json() const {
  json arts = json::array();
  for (const Artifact& a : artifacts) arts.push_back({{"role", a.role}, {"path", a.path}, {"complete", a.complete}});
  json diags = json::object();
  for (const auto& [k, v] : diagnostics) diags[k] = v;
  json inv = json::array();
  for (const InvariantResult& r : invariants) inv.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  json j = {{"scenario", scenario}, {"wall_seconds", wall_seconds}, {"termination", termination},
            {"artifacts", arts},    {"diagnostics", diags},         {"invariants", inv}};
  if (termination == "error") j["error"] = {{"kind", error_kind}, {"message", error}};
  return j;
}

std::filesystem::path output_directory(const ScenarioConfig& config) {
  if (const char* env = std::getenv("GEOFLOW_OUT"); env && *env) return env;
  if (!config.output_dir.empty()) return config.output_dir;
  return std::filesystem::path("geoflow_out") / config.name;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::Config, "cannot write \"" + tmp.string() + "\"");
    os << content;
    os.flush();
    if (!os) throw Error(ErrorKind::Config, "failed writing \"" + tmp.string() + "\"");
  }
  std::filesystem::rename(tmp, path);
}

RunReport run_scenario(const ScenarioConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.scenario = config.to_json();
  const std::filesystem::path dir = output_directory(config);
  rep.scenario["output_dir"] = dir.string();
  Output out(dir, rep);
  const Obj extra(config.extra, "");
  // Errors before the guard are config errors; after it they are solver errors.
  bool running = false;
  try {
    runner_for(config.kind)(config, extra, out, rep, [&] { running = true; });
  } catch (const Error& e) {
    if (!running || e.kind() == ErrorKind::Config) throw;
    rep.termination = "error";
    rep.error = e.what();
    rep.error_kind = to_string(e.kind());
    out.mark_incomplete();
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_atomic(dir / "report.json", rep.to_json().dump(2) + "\n");
  return rep;
}

}  // namespace geoflow
