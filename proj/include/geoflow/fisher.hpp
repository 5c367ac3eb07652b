#pragma once

// Score, Fisher information matrix, Cramer-Rao gap and maximum likelihood on
// finite sample spaces.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace geoflow {

using Params = Eigen::VectorXd;

/// Finite family p(outcome; theta). Rows of the jacobian are outcomes,
/// columns parameters. When `jacobian` is empty the derivatives are taken by
/// central finite differences.
struct DiscreteFamily {
  std::string name;
  std::vector<std::string> outcomes;
  std::size_t dim = 1;
  std::function<Eigen::VectorXd(const Params&)> probabilities;
  std::function<Eigen::MatrixXd(const Params&)> jacobian;
  /// Open admissible region of the parameter space, inside the box
  /// [lower, upper]; `start` is an interior point used to seed the MLE.
  std::function<bool(const Params&)> admissible;
  Params lower;
  Params upper;
  Params start;
  /// Unbiased estimator built from the sufficient statistic; attains the bound.
  std::function<Eigen::MatrixXd()> natural_estimator;

  std::size_t size() const { return outcomes.size(); }
};

DiscreteFamily bernoulli_family();
/// n independent tosses; outcomes are the 2^n toss sequences, bit i = toss i.
DiscreteFamily binomial_family(int n);
/// k categories, theta = (p_1, ..., p_{k-1}).
DiscreteFamily categorical_family(int k);
/// Builds a family by name: "bernoulli", "binomial-<n>", "categorical-<k>".
DiscreteFamily family_by_name(const std::string& name);

/// Map from outcomes to parameter estimates (rows = outcomes).
struct Estimator {
  std::string name;
  Eigen::MatrixXd values;
};

Eigen::VectorXd probabilities_checked(const DiscreteFamily& family, const Params& theta);
Eigen::MatrixXd family_jacobian(const DiscreteFamily& family, const Params& theta);

/// Per-outcome score d log p / d theta (rows = outcomes). Outcomes with zero
/// probability and zero derivative get a zero score; zero probability with a
/// nonzero derivative is a domain error.
Eigen::MatrixXd score(const DiscreteFamily& family, const Params& theta);

/// E[score], zero for every admissible theta.
Eigen::VectorXd score_expectation(const DiscreteFamily& family, const Params& theta);

/// g_ij = E[V_i V_j].
Eigen::MatrixXd fisher_matrix(const DiscreteFamily& family, const Params& theta);

/// cov(est) - fisher^{-1}. Throws BiasError when |E[est] - theta| > 1e-8 and
/// singular when the Fisher matrix cannot be inverted.
Eigen::MatrixXd cramer_rao_gap(const DiscreteFamily& family, const Estimator& est, const Params& theta);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

struct MleResult {
  Params theta;
  bool boundary = false;  ///< optimum sits on the edge of the admissible region
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Maximises sum_w w log p(outcome; theta). One parameter: safeguarded Newton
/// with a bisection fallback. More parameters: Fisher scoring with step
/// halving. Throws NonConvergenceError carrying the best iterate.
MleResult mle(const DiscreteFamily& family, const Eigen::VectorXd& weights);

/// Locally unbiased estimators at theta: base + c * delta on one parameter
/// coordinate, where delta is e_a / p_a - e_b / p_b with its projection on the
/// score removed, so E[est] = theta and dE[est]/dtheta = I at theta. One entry
/// per outcome pair (a, b) with a nonzero delta, coordinate and coefficient;
/// the base estimator comes first.
std::vector<Estimator> unbiased_estimator_grid(const DiscreteFamily& family, const Params& theta,
                                               const Estimator& base, const std::vector<double>& coefficients);

/// -sum p log p (natural log, 0 log 0 = 0).
double shannon_entropy(const Eigen::VectorXd& p);
/// H_A(B) = sum_a p(a) H(B | a) for a joint table with rows a, columns b.
double conditional_entropy(const Eigen::MatrixXd& joint);

}  // namespace geoflow
