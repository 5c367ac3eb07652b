#include "geoflow/fisher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "geoflow/error.hpp"
#include "geoflow/series.hpp"

namespace geoflow {
namespace {

constexpr double kNormalisationTol = 1e-12;
constexpr double kBiasTol = 1e-8;
constexpr double kStationarityTol = 1e-9;
constexpr int kMleBudget = 200;

Eigen::MatrixXd finite_difference_jacobian(const DiscreteFamily& family, const Params& theta) {
  Eigen::MatrixXd jac(family.size(), family.dim);
  for (std::size_t r = 0; r < family.dim; ++r) {
    const double step = 1e-6 * std::max(1.0, std::abs(theta[r]));
    Params up = theta, down = theta;
    up[r] += step;
    down[r] -= step;
    jac.col(static_cast<Eigen::Index>(r)) = (family.probabilities(up) - family.probabilities(down)) / (2.0 * step);
  }
  return jac;
}

double log_likelihood(const DiscreteFamily& family, const Eigen::VectorXd& w, const Params& theta) {
  const Eigen::VectorXd p = family.probabilities(theta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (w[i] == 0.0) continue;
    if (!(p[i] > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += w[i] * std::log(p[i]);
  }
  return ll;
}

Eigen::VectorXd likelihood_gradient(const DiscreteFamily& family, const Eigen::VectorXd& w, const Params& theta) {
  const Eigen::VectorXd p = family.probabilities(theta);
  const Eigen::MatrixXd jac = family_jacobian(family, theta);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family.dim));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (w[i] == 0.0) continue;
    g += w[i] * jac.row(i).transpose() / p[i];
  }
  return g;
}

MleResult mle_scalar(const DiscreteFamily& family, const Eigen::VectorXd& w) {
  const double lo_edge = family.lower[0], hi_edge = family.upper[0];
  const double eps = 1e-12 * (hi_edge - lo_edge);
  auto grad = [&](double x) { return likelihood_gradient(family, w, Params::Constant(1, x))[0]; };
  MleResult out;
  out.theta = Params::Constant(1, lo_edge);
  // Monotone likelihood: the supremum is approached at an edge.
  const double g_lo = grad(lo_edge + eps);
  if (g_lo <= 0.0) {
    out.boundary = true;
    out.gradient_norm = std::abs(g_lo);
    return out;
  }
  const double g_hi = grad(hi_edge - eps);
  if (g_hi >= 0.0) {
    out.theta[0] = hi_edge;
    out.boundary = true;
    out.gradient_norm = std::abs(g_hi);
    return out;
  }
  double lo = lo_edge + eps, hi = hi_edge - eps;
  double x = family.start[0];
  std::vector<double> history;
  for (int it = 1; it <= kMleBudget; ++it) {
    const double g = grad(x);
    history.push_back(std::abs(g));
    if (std::abs(g) <= kStationarityTol) {
      out.theta[0] = x;
      out.iterations = it;
      out.gradient_norm = std::abs(g);
      return out;
    }
    if (g > 0.0) lo = x; else hi = x;
    const double d = std::max(1e-7 * (hi - lo), 1e-12);
    const double curvature = (grad(x + d) - grad(x - d)) / (2.0 * d);
    double next = curvature < 0.0 ? x - g / curvature : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      // Bracket collapsed to rounding; the root is as good as it gets.
      out.theta[0] = x;
      out.iterations = it;
      out.gradient_norm = std::abs(g);
      return out;
    }
    x = next;
  }
  throw NonConvergenceError("scalar MLE exhausted its iteration budget", {x}, history);
}

MleResult mle_vector(const DiscreteFamily& family, const Eigen::VectorXd& w) {
  const double total = w.sum();
  Params x = family.start;
  double ll = log_likelihood(family, w, x);
  std::vector<double> history;
  MleResult out;
  for (int it = 1; it <= kMleBudget; ++it) {
    const Eigen::VectorXd g = likelihood_gradient(family, w, x);
    history.push_back(g.norm());
    if (g.norm() <= kStationarityTol) {
      out.theta = x;
      out.iterations = it;
      out.gradient_norm = g.norm();
      return out;
    }
    const Eigen::MatrixXd fisher = fisher_matrix(family, x);
    const Eigen::VectorXd direction = fisher.ldlt().solve(g) / total;
    double alpha = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      const Params trial = x + alpha * direction;
      if (!family.admissible(trial)) continue;
      const double trial_ll = log_likelihood(family, w, trial);
      if (trial_ll >= ll) {
        x = trial;
        ll = trial_ll;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // No admissible ascent step left: the optimum is on the boundary.
      out.theta = x;
      out.iterations = it;
      out.boundary = true;
      out.gradient_norm = g.norm();
      return out;
    }
  }
  throw NonConvergenceError("Fisher scoring exhausted its iteration budget",
                            std::vector<double>(x.data(), x.data() + x.size()), history);
}

Params scalar(double v) { return Params::Constant(1, v); }

}  // namespace

DiscreteFamily bernoulli_family() {
  DiscreteFamily f;
  f.name = "bernoulli";
  f.outcomes = {"failure", "success"};
  f.dim = 1;
  f.probabilities = [](const Params& t) {
    Eigen::VectorXd p(2);
    p << 1.0 - t[0], t[0];
    return p;
  };
  f.jacobian = [](const Params&) {
    Eigen::MatrixXd j(2, 1);
    j << -1.0, 1.0;
    return j;
  };
  f.admissible = [](const Params& t) { return t[0] > 0.0 && t[0] < 1.0; };
  f.lower = scalar(0.0);
  f.upper = scalar(1.0);
  f.start = scalar(0.5);
  f.natural_estimator = [] {
    Eigen::MatrixXd e(2, 1);
    e << 0.0, 1.0;
    return e;
  };
  return f;
}

DiscreteFamily binomial_family(int n) {
  if (n < 1 || n > 20) throw Error(ErrorKind::Config, "binomial family supports 1..20 tosses");
  const std::size_t count = std::size_t{1} << n;
  DiscreteFamily f;
  f.name = "binomial-" + std::to_string(n);
  f.dim = 1;
  for (std::size_t b = 0; b < count; ++b) {
    std::string label;
    for (int i = 0; i < n; ++i) label += (b >> i) & 1U ? '1' : '0';
    f.outcomes.push_back(label);
  }
  f.probabilities = [n, count](const Params& t) {
    const double p = t[0];
    Eigen::VectorXd out(static_cast<Eigen::Index>(count));
    for (std::size_t b = 0; b < count; ++b) {
      const int k = std::popcount(b);
      out[static_cast<Eigen::Index>(b)] = std::pow(p, k) * std::pow(1.0 - p, n - k);
    }
    return out;
  };
  f.jacobian = [n, count](const Params& t) {
    const double p = t[0];
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), 1);
    for (std::size_t b = 0; b < count; ++b) {
      const int k = std::popcount(b);
      double d = 0.0;
      if (k > 0) d += k * std::pow(p, k - 1) * std::pow(1.0 - p, n - k);
      if (k < n) d -= (n - k) * std::pow(p, k) * std::pow(1.0 - p, n - k - 1);
      out(static_cast<Eigen::Index>(b), 0) = d;
    }
    return out;
  };
  f.admissible = [](const Params& t) { return t[0] > 0.0 && t[0] < 1.0; };
  f.lower = scalar(0.0);
  f.upper = scalar(1.0);
  f.start = scalar(0.5);
  f.natural_estimator = [n, count] {
    Eigen::MatrixXd e(static_cast<Eigen::Index>(count), 1);
    for (std::size_t b = 0; b < count; ++b) e(static_cast<Eigen::Index>(b), 0) = std::popcount(b) / double(n);
    return e;
  };
  return f;
}

DiscreteFamily categorical_family(int k) {
  if (k < 2 || k > 64) throw Error(ErrorKind::Config, "categorical family supports 2..64 categories");
  const auto d = static_cast<Eigen::Index>(k - 1);
  DiscreteFamily f;
  f.name = "categorical-" + std::to_string(k);
  f.dim = static_cast<std::size_t>(d);
  for (int i = 0; i < k; ++i) f.outcomes.push_back("c" + std::to_string(i));
  f.probabilities = [k, d](const Params& t) {
    Eigen::VectorXd p(k);
    p.head(d) = t;
    p[d] = 1.0 - t.sum();
    return p;
  };
  f.jacobian = [k, d](const Params&) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(k, d);
    j.topRows(d) = Eigen::MatrixXd::Identity(d, d);
    j.row(d).setConstant(-1.0);
    return j;
  };
  f.admissible = [](const Params& t) { return (t.array() > 0.0).all() && t.sum() < 1.0; };
  f.lower = Params::Zero(d);
  f.upper = Params::Ones(d);
  f.start = Params::Constant(d, 1.0 / k);
  f.natural_estimator = [k, d] {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, d);
    e.topRows(d) = Eigen::MatrixXd::Identity(d, d);
    return e;
  };
  return f;
}

DiscreteFamily family_by_name(const std::string& name) {
  if (name == "bernoulli") return bernoulli_family();
  auto suffix = [&](const std::string& prefix) -> int {
    try {
      std::size_t used = 0;
      const int v = std::stoi(name.substr(prefix.size()), &used);
      if (used != name.size() - prefix.size()) throw std::invalid_argument(name);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "bad family size in '" + name + "'");
    }
  };
  if (name.rfind("binomial-", 0) == 0) return binomial_family(suffix("binomial-"));
  if (name.rfind("categorical-", 0) == 0) return categorical_family(suffix("categorical-"));
  throw Error(ErrorKind::Config, "unknown family '" + name + "'");
}

Eigen::VectorXd probabilities_checked(const DiscreteFamily& family, const Params& theta) {
  if (static_cast<std::size_t>(theta.size()) != family.dim) {
    throw Error(ErrorKind::Contract, "parameter dimension mismatch for " + family.name);
  }
  const Eigen::VectorXd p = family.probabilities(theta);
  if ((p.array() < 0.0).any()) throw Error(ErrorKind::Domain, family.name + ": negative probability");
  if (std::abs(p.sum() - 1.0) > kNormalisationTol) {
    throw Error(ErrorKind::Domain, family.name + ": probabilities sum to " + format_double(p.sum()));
  }
  return p;
}

Eigen::MatrixXd family_jacobian(const DiscreteFamily& family, const Params& theta) {
  return family.jacobian ? family.jacobian(theta) : finite_difference_jacobian(family, theta);
}

Eigen::MatrixXd score(const DiscreteFamily& family, const Params& theta) {
  const Eigen::VectorXd p = probabilities_checked(family, theta);
  const Eigen::MatrixXd jac = family_jacobian(family, theta);
  Eigen::MatrixXd v(jac.rows(), jac.cols());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      v.row(i) = jac.row(i) / p[i];
    } else if (jac.row(i).cwiseAbs().maxCoeff() == 0.0) {
      v.row(i).setZero();
    } else {
      throw Error(ErrorKind::Domain, family.name + ": outcome '" + family.outcomes[static_cast<std::size_t>(i)] +
                                         "' has zero probability but nonzero derivative");
    }
  }
  return v;
}

Eigen::VectorXd score_expectation(const DiscreteFamily& family, const Params& theta) {
  const Eigen::VectorXd p = probabilities_checked(family, theta);
  return score(family, theta).transpose() * p;
}

Eigen::MatrixXd fisher_matrix(const DiscreteFamily& family, const Params& theta) {
  const Eigen::VectorXd p = probabilities_checked(family, theta);
  const Eigen::MatrixXd v = score(family, theta);
  Eigen::MatrixXd g = v.transpose() * p.asDiagonal() * v;
  return 0.5 * (g + g.transpose());
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Eigen::MatrixXd cramer_rao_gap(const DiscreteFamily& family, const Estimator& est, const Params& theta) {
  const Eigen::VectorXd p = probabilities_checked(family, theta);
  if (est.values.rows() != p.size() || static_cast<std::size_t>(est.values.cols()) != family.dim) {
    throw Error(ErrorKind::Contract, "estimator '" + est.name + "' does not match the family shape");
  }
  const Eigen::VectorXd mean = est.values.transpose() * p;
  const Eigen::VectorXd bias = mean - theta;
  if (bias.cwiseAbs().maxCoeff() > kBiasTol) {
    throw BiasError("estimator '" + est.name + "' has bias " + format_double(bias.cwiseAbs().maxCoeff()),
                    std::vector<double>(bias.data(), bias.data() + bias.size()));
  }
  const Eigen::MatrixXd centered = est.values.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * p.asDiagonal() * centered;
  const Eigen::MatrixXd fisher = fisher_matrix(family, theta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fisher);
  const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-14 * std::max(largest, 1e-300))) {
    throw Error(ErrorKind::Singular, family.name + ": Fisher matrix is singular");
  }
  const Eigen::MatrixXd inverse =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd gap = cov - inverse;
  return 0.5 * (gap + gap.transpose());
}

MleResult mle(const DiscreteFamily& family, const Eigen::VectorXd& weights) {
  if (static_cast<std::size_t>(weights.size()) != family.size()) {
    throw Error(ErrorKind::Contract, "weights must have one entry per outcome");
  }
  if ((weights.array() < 0.0).any() || !(weights.sum() > 0.0)) {
    throw Error(ErrorKind::Contract, "weights must be non-negative and not all zero");
  }
  return family.dim == 1 ? mle_scalar(family, weights) : mle_vector(family, weights);
}

std::vector<Estimator> unbiased_estimator_grid(const DiscreteFamily& family, const Params& theta,
                                               const Estimator& base, const std::vector<double>& coefficients) {
  const Eigen::VectorXd p = probabilities_checked(family, theta);
  const Eigen::MatrixXd v = score(family, theta);
  const Eigen::LDLT<Eigen::MatrixXd> g(fisher_matrix(family, theta));
  std::vector<Estimator> out{base};
  const auto m = p.size();
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      if (!(p[a] > 0.0 && p[b] > 0.0)) continue;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
      d[a] = 1.0 / p[a];
      d[b] = -1.0 / p[b];
      // Remove the component along the score so that dE/dtheta is unchanged.
      const Eigen::VectorXd delta = d - v * g.solve(v.transpose() * p.cwiseProduct(d));
      if (delta.cwiseAbs().maxCoeff() <= 1e-12 * d.cwiseAbs().maxCoeff()) continue;
      for (std::size_t r = 0; r < family.dim; ++r) {
        for (double c : coefficients) {
          Estimator e{base.name + "+pair(" + std::to_string(a) + "," + std::to_string(b) + ")", base.values};
          e.values.col(static_cast<Eigen::Index>(r)) += c * delta;
          out.push_back(std::move(e));
        }
      }
    }
  }
  return out;
}

double shannon_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

double conditional_entropy(const Eigen::MatrixXd& joint) {
  double h = 0.0;
  for (Eigen::Index a = 0; a < joint.rows(); ++a) {
    const double pa = joint.row(a).sum();
    if (pa > 0.0) h += pa * shannon_entropy(joint.row(a).transpose() / pa);
  }
  return h;
}

}  // namespace geoflow
