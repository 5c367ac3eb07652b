#include <doctest.h>

#include <cmath>

#include "geoflow/error.hpp"
#include "geoflow/heat.hpp"
#include "oracles.hpp"

using namespace geoflow;
using oracle::kPi;

namespace {

double profile(double x) { return 1.0 + 0.5 * std::cos(2.0 * kPi * x); }
double profile_dx(double x) { return -kPi * std::sin(2.0 * kPi * x); }

HeatState evolve(HeatState s, double t_end) {
  const double dt_max = heat_max_dt(s.field);
  while (s.time < t_end - 1e-15) s = step_heat(s, std::min(dt_max, t_end - s.time));
  return s;
}

}  // namespace

TEST_CASE("step size limit") {
  const ScalarField u1 = ScalarField::one_d(64, 1.0, profile);
  const ScalarField u2 = ScalarField::two_d(32, 1.0, [](double x, double y) { return profile(x) * profile(y); });
  CHECK(heat_max_dt(u1) == doctest::Approx(0.25 * u1.h() * u1.h()).epsilon(1e-15));
  CHECK(heat_max_dt(u2) == doctest::Approx(0.125 * u2.h() * u2.h()).epsilon(1e-15));
  try {
    step_heat({u1, 0.0}, 1.01 * heat_max_dt(u1));
    FAIL("oversized step accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepSize);
  }
}

TEST_CASE("functionals match quadrature of the closed form") {
  const HeatState s{ScalarField::one_d(256, 1.0, profile), 0.0};
  const HeatFunctionals f = functionals(s);
  const double l2 = oracle::integrate([](double x) { return profile(x) * profile(x); }, 0.0, 1.0);
  const double energy = oracle::integrate([](double x) { return profile_dx(x) * profile_dx(x); }, 0.0, 1.0);
  const double entropy = oracle::integrate([](double x) { return profile(x) * std::log(profile(x)); }, 0.0, 1.0);
  const double fisher =
      oracle::integrate([](double x) { return profile_dx(x) * profile_dx(x) / profile(x); }, 0.0, 1.0);
  CHECK(std::abs(f.l2 - l2) <= 1e-10);
  CHECK(std::abs(f.energy - energy) <= 1e-6 * energy);
  CHECK(std::abs(f.entropy - entropy) <= 1e-10);
  CHECK(std::abs(f.fisher - fisher) <= 1e-6 * fisher);
}

TEST_CASE("information functionals need positive data") {
  const HeatState s{ScalarField::one_d(64, 1.0, [](double x) { return std::sin(2.0 * kPi * x); }), 0.0};
  try {
    functionals(s);
    FAIL("entropy of signed data accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Positivity);
  }
  CHECK_NOTHROW(functionals(s, false));
  CHECK_THROWS_AS(fisher_dissipation(s.field), Error);
}

TEST_CASE("Fourier modes decay at the continuum rate") {
  const HeatState s = evolve({ScalarField::one_d(128, 1.0, profile), 0.0}, 0.01);
  const double amp = s.field.max() - s.field.min();  // initial peak-to-peak is 1
  CHECK(std::abs(amp - std::exp(-4.0 * kPi * kPi * 0.01)) <= 1e-3);

  const HeatState s2 = evolve(
      {ScalarField::two_d(64, 1.0, [](double x, double y) { return std::cos(2.0 * kPi * x) * std::cos(2.0 * kPi * y); }),
       0.0},
      0.01);
  CHECK(std::abs(s2.field.max() - std::exp(-8.0 * kPi * kPi * 0.01)) <= 5e-3);
}

TEST_CASE("mass is conserved") {
  HeatState s{ScalarField::two_d(32, 1.0, [](double x, double y) { return 2.0 + std::sin(2.0 * kPi * x) * y; }), 0.0};
  const double m0 = s.field.integral();
  s = evolve(s, 0.01);
  CHECK(std::abs(s.field.integral() - m0) <= 1e-13 * std::abs(m0));
}

TEST_CASE("fisher rate matches the time derivative of the information") {
  const HeatState s{ScalarField::one_d(256, 1.0, profile), 0.0};
  const double dt = 0.1 * heat_max_dt(s.field);
  const HeatState a = step_heat(s, dt);
  const HeatState b = step_heat(a, dt);
  const double rate = (functionals(b).fisher - functionals(s).fisher) / (2.0 * dt);
  CHECK(std::abs(rate - fisher_rate(a.field)) <= 1e-3 * std::abs(rate));
  CHECK(fisher_rate(a.field) < 0.0);
  // The pure dissipation term alone misses the cross term.
  CHECK(std::abs(rate + fisher_dissipation(a.field)) > 1e-2 * std::abs(rate));
}

TEST_CASE("run series is monotone and satisfies Li-Yau") {
  HeatRunConfig cfg(ScalarField::one_d(128, 1.0, [](double x) { return 1.0 + 0.9 * std::sin(2.0 * kPi * x); }));
  cfg.t_end = 0.02;
  cfg.sample_every = 5;
  const HeatRunResult r = run_heat(cfg);
  for (const char* col : {"l2", "energy", "entropy", "fisher"}) {
    const auto v = r.series.column(col);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1] + 1e-14 * std::abs(v[i - 1]));
  }
  const auto ly = r.series.column("liyau_min");
  for (std::size_t i = 1; i < ly.size(); ++i) CHECK(ly[i] >= 0.0);
  CHECK(std::isnan(ly[0]));
}

TEST_CASE("smoothing bounds stay finite") {
  HeatRunConfig cfg(ScalarField::one_d(128, 1.0, [](double x) { return x < 0.5 ? 1.0 : 0.0; }));
  cfg.t_end = 0.01;
  cfg.information = false;
  cfg.keep_states = true;
  const HeatRunResult r = run_heat(cfg);
  REQUIRE(r.samples.size() > 2);
  const double b1 = smoothing_bound(r.samples, 1);
  const double b2 = smoothing_bound(r.samples, 2);
  CHECK(std::isfinite(b1));
  CHECK(std::isfinite(b2));
  CHECK(b1 < 1.0);
  CHECK(b2 < 1.0);
}
