#include <doctest.h>

#include <cmath>

#include "geoflow/error.hpp"
#include "geoflow/heat.hpp"
#include "geoflow/ricci2d.hpp"
#include "oracles.hpp"

using namespace geoflow;
using oracle::kPi;

namespace {

double bump(double x, double y) { return 0.3 * std::sin(2.0 * kPi * x) * std::cos(2.0 * kPi * y); }

}  // namespace

TEST_CASE("scalar curvature matches a spectral Laplacian") {
  const std::size_t n = 256;
  const ConformalMetric m = make_conformal_metric(n, bump);
  const ScalarField r = scalar_curvature(m);
  const auto u = m.u.periodic();
  const auto lap = oracle::spectral_laplacian({u.begin(), u.end()}, n);
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) {
    const double exact = -2.0 * std::exp(-2.0 * u[k]) * lap[k];
    err = std::max(err, std::abs(r.periodic()[k] - exact));
    scale = std::max(scale, std::abs(exact));
  }
  CHECK(err <= 1e-4 * scale);
}

TEST_CASE("Gauss-Bonnet and flat metrics") {
  const ConformalMetric m = make_conformal_metric(32, bump);
  CHECK(std::abs(total_curvature_measure(m)) <= 1e-12);
  const ConformalMetric flat = make_conformal_metric(32, [](double, double) { return 0.25; });
  CHECK(metric_area(flat) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  for (double v : scalar_curvature(flat).periodic()) CHECK(v == 0.0);
  CHECK(step_ricci(flat, ricci_max_dt(flat)).u == flat.u);
}

TEST_CASE("step size limit and stepper kernel") {
  const ConformalMetric m = make_conformal_metric(32, bump);
  CHECK(ricci_max_dt(m) == doctest::Approx(0.2 * m.u.h() * m.u.h() * std::exp(2.0 * m.u.min())).epsilon(1e-14));
  try {
    step_ricci(m, 1.01 * ricci_max_dt(m));
    FAIL("oversized step accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepSize);
  }
  const double dt = 0.5 * ricci_max_dt(m);
  const ConformalMetric next = step_ricci(m, dt);
  for (std::size_t j = 0; j < 32; j += 7)
    for (std::size_t i = 0; i < 32; i += 5)
      CHECK(next.u.at(i, j) == conformal_update(m.u.at(i, j), m.u.lap(i, j), dt));
}

TEST_CASE("small conformal factors follow the linear heat flow") {
  const double eps = 1e-4, t_end = 0.005;
  ConformalMetric m = make_conformal_metric(32, [=](double x, double y) { return eps * bump(x, y); });
  HeatState h{m.u, 0.0};
  const double dt = 0.1 * m.u.h() * m.u.h();
  double t = 0.0;
  while (t < t_end - 1e-15) {
    const double s = std::min(dt, t_end - t);
    m = step_ricci(m, s);
    h = step_heat(h, s);
    t += s;
  }
  double diff = 0.0;
  for (std::size_t k = 0; k < m.u.size(); ++k) diff = std::max(diff, std::abs(m.u.periodic()[k] - h.field.periodic()[k]));
  CHECK(diff <= 1e-3 * h.field.max());
}

TEST_CASE("curvature ODE and Harnack quantity") {
  CHECK(curvature_ode_oracle(1.0, 0.5) == 2.0);
  CHECK(curvature_ode_oracle(-1.0, 1.0) == -0.5);
  CHECK_THROWS_AS(curvature_ode_oracle(1.0, 1.0), Error);
  const double r = curvature_ode_oracle(0.5, 0.4);
  CHECK(ricci_harnack_ode(0.5, 0.4) == doctest::Approx(r * r + r / 0.4).epsilon(1e-15));
  CHECK(ricci_harnack_ode(0.5, 0.4) > 0.0);
}

TEST_CASE("Hamilton entropy") {
  const ConformalMetric m = make_conformal_metric(16, [](double, double) { return 0.0; });
  const auto constant = [&](double value) {
    return ScalarField::two_d(16, 1.0, [=](double, double) { return value; });
  };
  CHECK(hamilton_entropy(m, constant(std::exp(1.0))) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(std::abs(hamilton_entropy(m, constant(1.0))) <= 1e-15);
  const ScalarField mixed = ScalarField::two_d(16, 1.0, [](double x, double) { return std::sin(2.0 * kPi * x); });
  try {
    hamilton_entropy(m, mixed);
    FAIL("entropy of signed curvature accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Positivity);
  }
  CHECK_THROWS_AS(hamilton_entropy(m, ScalarField::two_d(32, 1.0, [](double, double) { return 1.0; })), Error);
  // On the torus R has zero mean, so the one-argument form always refuses.
  CHECK_THROWS_AS(hamilton_entropy(make_conformal_metric(16, bump)), Error);
}

TEST_CASE("perelman F with f = 0 is the total curvature") {
  const ConformalMetric m = make_conformal_metric(32, bump);
  const ScalarField zero = ScalarField::two_d(32, 1.0, [](double, double) { return 0.0; });
  CHECK(std::abs(perelman_F(m, zero) - total_curvature_measure(m)) <= 1e-13);
}

TEST_CASE("run flows to the flat metric") {
  RicciRunConfig cfg(make_conformal_metric(32, bump));
  cfg.t_end = 1.0;
  const RicciRunResult r = run_ricci(cfg);
  const auto sup = r.series.column("sup_abs_R");
  CHECK(sup.back() < 1e-6 * sup.front());
  for (double v : r.series.column("total_R_measure")) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("area drift is a first-order time discretisation effect") {
  auto drift = [](double cfl) {
    RicciRunConfig cfg(make_conformal_metric(32, bump));
    cfg.t_end = 0.2;
    cfg.cfl_factor = cfl;
    const auto area = run_ricci(cfg).series.column("area");
    return std::abs(area.back() - area.front()) / area.front();
  };
  const double coarse = drift(1.0), fine = drift(0.5);
  CHECK(coarse <= 1e-3);
  CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.05));
}
