#include <doctest.h>

#include <cmath>

#include "geoflow/error.hpp"
#include "geoflow/fisher.hpp"
#include "geoflow/kernel.hpp"
#include "oracles.hpp"

using namespace geoflow;
using oracle::kPi;

namespace {

Params vec(std::initializer_list<double> v) {
  Params p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Estimator natural(const DiscreteFamily& f) { return {"natural", f.natural_estimator()}; }

}  // namespace

TEST_CASE("Fisher information of the built-in families") {
  const double p = 0.3;
  CHECK(fisher_matrix(bernoulli_family(), vec({p}))(0, 0) == doctest::Approx(1.0 / (p * (1 - p))).epsilon(1e-13));

  const DiscreteFamily b5 = binomial_family(5);
  CHECK(b5.size() == 32);
  CHECK(fisher_matrix(b5, vec({p}))(0, 0) == doctest::Approx(5.0 / (p * (1 - p))).epsilon(1e-12));

  const Params t = vec({0.2, 0.3, 0.1});
  const Eigen::MatrixXd g = fisher_matrix(categorical_family(4), t);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Constant(3, 3, 1.0 / 0.4);
  for (int i = 0; i < 3; ++i) expected(i, i) += 1.0 / t[i];
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("score has zero mean") {
  CHECK(score_expectation(binomial_family(4), vec({0.63})).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(score_expectation(categorical_family(5), vec({0.1, 0.2, 0.3, 0.15})).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("finite-difference jacobian") {
  DiscreteFamily f = categorical_family(3);
  f.jacobian = nullptr;
  const Params t = vec({0.25, 0.5});
  const Eigen::MatrixXd g = fisher_matrix(f, t);
  CHECK((g - fisher_matrix(categorical_family(3), t)).cwiseAbs().maxCoeff() <= 1e-6 * g.norm());
}

TEST_CASE("natural estimators attain the bound") {
  for (const char* name : {"bernoulli", "binomial-6", "categorical-5"}) {
    const DiscreteFamily f = family_by_name(name);
    const Params t = f.dim == 1 ? vec({0.35}) : vec({0.1, 0.2, 0.3, 0.15});
    const Eigen::MatrixXd gap = cramer_rao_gap(f, natural(f), t);
    CHECK(gap.cwiseAbs().maxCoeff() <= 1e-10 * fisher_matrix(f, t).inverse().norm());
  }
}

TEST_CASE("locally unbiased estimators respect the bound") {
  // The categorical score spans every mean-zero direction: nothing to add.
  const DiscreteFamily cat = categorical_family(4);
  CHECK(unbiased_estimator_grid(cat, vec({0.2, 0.3, 0.1}), natural(cat), {0.1}).size() == 1);

  const DiscreteFamily f = binomial_family(3);
  const Params t = vec({0.4});
  const auto grid = unbiased_estimator_grid(f, t, natural(f), {-0.05, 0.05});
  REQUIRE(grid.size() > 10);
  CHECK(grid.front().name == "natural");
  for (const Estimator& e : grid) {
    const Eigen::VectorXd mean = e.values.transpose() * probabilities_checked(f, t);
    CHECK((mean - t).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(min_eigenvalue(cramer_rao_gap(f, e, t)) >= -1e-10);
  }
}

TEST_CASE("bias and singular information are reported") {
  const DiscreteFamily f = bernoulli_family();
  Estimator biased{"biased", Eigen::MatrixXd::Constant(2, 1, 0.5)};
  try {
    cramer_rao_gap(f, biased, vec({0.3}));
    FAIL("biased estimator accepted");
  } catch (const BiasError& e) {
    REQUIRE(e.bias().size() == 1);
    CHECK(e.bias()[0] == doctest::Approx(0.2));
  }

  // Two parameters entering only through their sum.
  DiscreteFamily redundant = f;
  redundant.dim = 2;
  redundant.probabilities = [](const Params& t) { return vec({1.0 - t[0] - t[1], t[0] + t[1]}); };
  redundant.jacobian = [](const Params&) {
    Eigen::MatrixXd j(2, 2);
    j << -1, -1, 1, 1;
    return j;
  };
  const Params t = vec({0.1, 0.2});
  Estimator constant{"constant", Eigen::MatrixXd(2, 2)};
  constant.values << 0.1, 0.2, 0.1, 0.2;
  try {
    cramer_rao_gap(redundant, constant, t);
    FAIL("singular Fisher matrix accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singular);
  }
}

TEST_CASE("maximum likelihood") {
  const MleResult b = mle(bernoulli_family(), vec({3.0, 7.0}));
  CHECK(b.theta[0] == doctest::Approx(0.7).epsilon(1e-10));
  CHECK_FALSE(b.boundary);

  const MleResult edge = mle(bernoulli_family(), vec({0.0, 5.0}));
  CHECK(edge.boundary);
  CHECK(edge.theta[0] > 0.999);

  // Sequences 000, 110, 111 once each: 5 heads in 9 tosses.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  w[0] = w[3] = w[7] = 1.0;
  CHECK(mle(binomial_family(3), w).theta[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-9));

  const MleResult c = mle(categorical_family(4), vec({1.0, 2.0, 3.0, 4.0}));
  CHECK((c.theta - vec({0.1, 0.2, 0.3})).cwiseAbs().maxCoeff() <= 1e-8);

  CHECK_THROWS_AS(mle(bernoulli_family(), vec({1.0})), Error);
  CHECK_THROWS_AS(mle(bernoulli_family(), vec({-1.0, 2.0})), Error);
}

TEST_CASE("family lookup") {
  CHECK(family_by_name("binomial-3").size() == 8);
  CHECK(family_by_name("categorical-6").dim == 5);
  for (const char* bad : {"binomial-0", "binomial-x", "categorical-1", "poisson"}) {
    try {
      family_by_name(bad);
      FAIL(bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
  }
}

TEST_CASE("Shannon entropy") {
  CHECK(shannon_entropy(Eigen::VectorXd::Constant(8, 0.125)) == doctest::Approx(std::log(8.0)).epsilon(1e-15));
  CHECK(shannon_entropy(vec({1.0, 0.0})) == 0.0);

  Eigen::MatrixXd joint(2, 3);
  joint << 0.1, 0.2, 0.1, 0.3, 0.05, 0.25;
  Eigen::VectorXd flat(6);
  for (int i = 0; i < 6; ++i) flat[i] = joint(i / 3, i % 3);
  const Eigen::VectorXd pa = joint.rowwise().sum();
  CHECK(shannon_entropy(flat) == doctest::Approx(shannon_entropy(pa) + conditional_entropy(joint)).epsilon(1e-14));

  const Eigen::VectorXd a = vec({0.3, 0.7}), b = vec({0.2, 0.5, 0.3});
  CHECK(conditional_entropy(a * b.transpose()) == doctest::Approx(shannon_entropy(b)).epsilon(1e-14));
}

TEST_CASE("Gaussian delta sequence integrals") {
  const auto gauss = [](double x) { return std::exp(-x * x); };
  const auto x2gauss = [](double x) { return x * x * std::exp(-x * x); };
  for (double a : {0.5, 1.0, 10.0, 1e3}) {
    CHECK(delta_claim1_lhs(gauss, a) ==
          doctest::Approx(2.0 * std::pow(a, 2.5) / std::pow(a + 1.0, 1.5)).epsilon(1e-9));
    CHECK(delta_claim1_lhs(x2gauss, a) ==
          doctest::Approx(3.0 * std::pow(a, 2.5) / std::pow(a + 1.0, 2.5)).epsilon(1e-9));
  }
  const auto lorentz = [](double x) { return 1.0 / (1.0 + x * x); };
  const double a = 2.0;
  const double ref = oracle::integrate_line(
      [&](double x) { return 4.0 * a * a * x * x * std::sqrt(a / kPi) * std::exp(-a * x * x) * lorentz(x); });
  CHECK(delta_claim1_lhs(lorentz, a) == doctest::Approx(ref).epsilon(1e-9));
  CHECK_THROWS_AS(delta_claim1_lhs(gauss, 0.0), Error);
}

TEST_CASE("Gaussian kernel moments and expansion") {
  for (double k : {0.1, 0.5, 1.0}) {
    CHECK(kernel_expected([](double) { return 1.0; }, k) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(kernel_expected([](double x) { return x; }, k)) <= 1e-14);
    CHECK(kernel_expected([](double x) { return x * x; }, k) == doctest::Approx(kernel_expansion(0.0, 2.0, k)).epsilon(1e-12));
    const double exact = std::exp(-k * k / 4.0);
    CHECK(kernel_expected([](double x) { return std::cos(x); }, k) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(std::abs(kernel_expansion(1.0, -1.0, k) - exact) <= std::pow(k, 4) / 32.0 * 1.0001);
  }
  CHECK_THROWS_AS(kernel_expected([](double) { return 1.0; }, 0.0), Error);
}
