#include <doctest.h>

#include <cmath>

#include "geoflow/error.hpp"
#include "geoflow/mcf_graph.hpp"
#include "oracles.hpp"

using namespace geoflow;
using oracle::kPi;

namespace {

ScalarField evolve(ScalarField u, double t_end) {
  const double dt_max = kGraphMcfCfl * u.h() * u.h();
  double t = 0.0;
  while (t < t_end - 1e-15) {
    const double dt = std::min(dt_max, t_end - t);
    u = step_graph_mcf(u, dt);
    t += dt;
  }
  return u;
}

}  // namespace

TEST_CASE("sphere oracle") {
  CHECK(sphere_radius_oracle(1.0, 1, 0.0) == 1.0);
  CHECK(sphere_radius_oracle(1.0, 2, 0.125) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(sphere_radius_oracle(2.0, 3, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sphere_extinction_time(1.0, 2) == 0.25);
  CHECK_THROWS_AS(sphere_radius_oracle(1.0, 2, 0.25), Error);
}

TEST_CASE("planes are stationary") {
  const ScalarField flat = ScalarField::two_d(32, 1.0, [](double, double) { return 0.7; });
  CHECK(evolve(flat, 0.01) == flat);
  const ScalarField tilted = ScalarField::two_d(32, 1.0, [](double, double) { return 0.0; }, 0.4, -1.1);
  const ScalarField after = evolve(tilted, 0.01);
  CHECK(after.slope_x() == 0.4);
  CHECK(after.slope_y() == -1.1);
  for (double v : after.periodic()) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("graph area of planes") {
  const ScalarField tilted = ScalarField::two_d(32, 2.0, [](double, double) { return 0.0; }, 0.3, 0.4);
  CHECK(graph_area(tilted) == doctest::Approx(4.0 * std::sqrt(1.25)).epsilon(1e-13));
  const ScalarField line = ScalarField::one_d(32, 1.0, [](double) { return 0.0; }, 0.75);
  CHECK(graph_area(line) == doctest::Approx(1.25).epsilon(1e-13));
}

TEST_CASE("small amplitude modes decay at the linear rate") {
  const double eps = 1e-4, t = 0.02;
  const ScalarField u = evolve(
      ScalarField::one_d(128, 1.0, [=](double x) { return eps * std::cos(2.0 * kPi * x); }), t);
  const double expected = eps * std::exp(-4.0 * kPi * kPi * t);
  CHECK(std::abs(u.max() - expected) <= 1e-3 * expected);

  const ScalarField w = evolve(ScalarField::two_d(64, 1.0,
                                                  [=](double x, double y) {
                                                    return eps * std::cos(2.0 * kPi * x) * std::cos(2.0 * kPi * y);
                                                  }),
                               t);
  const double expected2 = eps * std::exp(-8.0 * kPi * kPi * t);
  CHECK(std::abs(w.max() - expected2) <= 5e-3 * expected2);
}

TEST_CASE("area decreases and the maximum principle holds") {
  ScalarField u = ScalarField::two_d(
      32, 1.0, [](double x, double y) { return 0.3 * std::sin(2.0 * kPi * x) + 0.2 * std::cos(4.0 * kPi * y); });
  const double sup0 = u.max(), inf0 = u.min();
  double area = graph_area(u);
  for (int k = 0; k < 20; ++k) {
    u = evolve(u, 1e-3);
    const double a = graph_area(u);
    CHECK(a <= area);
    area = a;
  }
  CHECK(u.max() <= sup0);
  CHECK(u.min() >= inf0);
}

TEST_CASE("step size limit") {
  const ScalarField u = ScalarField::one_d(32, 1.0, [](double x) { return std::sin(2.0 * kPi * x); });
  CHECK_NOTHROW(step_graph_mcf(u, kGraphMcfCfl * u.h() * u.h()));
  try {
    step_graph_mcf(u, 1.01 * kGraphMcfCfl * u.h() * u.h());
    FAIL("oversized step accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepSize);
  }
}
