#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "geoflow/error.hpp"
#include "geoflow/mse.hpp"

using namespace geoflow;

namespace {

double scherk(double x, double y) { return std::log(std::cos(y) / std::cos(x)); }

double max_error(const RectangleField& f, const std::function<double(double, double)>& exact) {
  double e = 0.0;
  for (std::size_t j = 0; j <= f.ny; ++j)
    for (std::size_t i = 0; i <= f.nx; ++i) e = std::max(e, std::abs(f(i, j) - exact(f.x(i), f.y(j))));
  return e;
}

RectangleField random_bump(const RectangleField& like, std::uint64_t seed) {
  RectangleField eta = like;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t j = 0; j <= eta.ny; ++j)
    for (std::size_t i = 0; i <= eta.nx; ++i) eta(i, j) = eta.on_boundary(i, j) ? 0.0 : dist(rng);
  return eta;
}

}  // namespace

TEST_CASE("planes solve the equation exactly") {
  const auto plane = [](double x, double y) { return 0.5 + 2.0 * x - 0.7 * y; };
  const GraphProblem p = GraphProblem::from_function(0.0, 1.0, 0.0, 1.0, 16, plane);
  CHECK(max_error(harmonic_extension(p), plane) <= 1e-12);
  const MseSolution s = solve_mse(p);
  CHECK(max_error(s.field, plane) <= 1e-12);
  CHECK(s.residual <= 1e-8);
}

TEST_CASE("Scherk surface converges at second order") {
  const double a = 1.2;
  auto error = [&](std::size_t n) {
    const MseSolution s = solve_mse(GraphProblem::from_function(-a, a, -a, a, n, scherk));
    CHECK(s.residual <= 1e-8);
    return max_error(s.field, scherk);
  };
  const double e32 = error(32), e64 = error(64);
  CHECK(e64 <= 1e-3);
  CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("helicoid graph away from its axis") {
  const auto helicoid = [](double x, double y) { return std::atan2(y, x); };
  const MseSolution s = solve_mse(GraphProblem::from_function(1.0, 2.0, 1.0, 2.0, 32, helicoid));
  CHECK(max_error(s.field, helicoid) <= 1e-4);
}

TEST_CASE("Newton converges quadratically") {
  const MseSolution s = solve_mse(GraphProblem::from_function(-1.2, 1.2, -1.2, 1.2, 32, scherk));
  const auto& r = s.residual_history;
  REQUIRE(r.size() >= 3);
  CHECK(r.back() <= 1e-8);
  for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] < r[k - 1]);
  const std::size_t n = r.size();
  // Last contraction is much stronger than linear.
  CHECK(r[n - 1] / r[n - 2] <= 0.1 * r[n - 2] / r[n - 3] + 1e-3);
  CHECK(s.step_lengths.size() == static_cast<std::size_t>(s.iterations));
}

TEST_CASE("solutions are critical and locally area minimising") {
  const MseSolution s = solve_mse(GraphProblem::from_function(-1.2, 1.2, -1.2, 1.2, 32, scherk));
  const double a0 = area(s.field);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const RectangleField eta = random_bump(s.field, seed);
    CHECK(std::abs(first_variation(s.field, eta)) <= 1e-8);
    for (double eps : {1e-2, -1e-2}) {
      RectangleField g = s.field;
      for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] += eps * eta.values[k];
      CHECK(area(g) > a0);
    }
  }
  RectangleField bad = random_bump(s.field, 9);
  bad(0, 3) = 1.0;
  CHECK_THROWS_AS(first_variation(s.field, bad), Error);
}

TEST_CASE("non-convergence carries the residual history") {
  try {
    solve_mse(GraphProblem::from_function(-1.2, 1.2, -1.2, 1.2, 32, scherk), 1e-8, 1);
    FAIL("one Newton step reached the tolerance");
  } catch (const NonConvergenceError& e) {
    CHECK(e.residual_history().size() >= 1);
    CHECK(e.best_iterate().size() == 33 * 33);
  }
}

TEST_CASE("grid contracts") {
  CHECK_THROWS_AS(GraphProblem::from_function(0.0, 1.0, 0.0, 1.0, 8, scherk), Error);
  CHECK_THROWS_AS(solve_mse(GraphProblem{RectangleField{}}), Error);
}

TEST_CASE("rectangle field csv") {
  const RectangleField f = RectangleField::sample(0.0, 1.0, 0.0, 2.0, 16, [](double x, double y) { return x * y; });
  CHECK(f.nx == 16);
  CHECK(f.ny == 32);
  std::stringstream ss;
  f.write_csv(ss);
  CHECK(RectangleField::read_csv(ss) == f);
  std::stringstream b;
  f.write_boundary_csv(b);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(b, line)) ++rows;
  CHECK(rows == 1 + 2 * (f.nx + f.ny));
  std::stringstream bad("1,2,3\n");
  CHECK_THROWS_AS(RectangleField::read_csv(bad), Error);
}
