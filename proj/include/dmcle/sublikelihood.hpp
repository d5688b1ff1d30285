#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace dmcle {

// One low-dimensional likelihood component over a subset of the data
// columns. Implementations are immutable after construction; every method
// is a pure function of theta.
//
// Conventions: loglik_avg is the average over observations of the log
// density (nats per observation), score is its gradient, and hessian its
// Hessian. Per-observation versions must average to the aggregate ones.
// Methods throw DomainError when theta is outside the support.
class SubLikelihood {
 public:
  virtual ~SubLikelihood() = default;

  virtual std::string label() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::size_t num_obs() const = 0;

  virtual Eigen::VectorXd per_obs_loglik(const Eigen::VectorXd& theta) const = 0;
  // n x p
  virtual Eigen::MatrixXd per_obs_score(const Eigen::VectorXd& theta) const = 0;

  virtual double loglik_avg(const Eigen::VectorXd& theta) const;
  virtual Eigen::VectorXd score(const Eigen::VectorXd& theta) const;
  // Central differences of score() unless overridden.
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const;
};

// Relative step used for every central finite difference in the library.
inline double fd_step(double x) { return 1e-6 * (1.0 + std::abs(x)); }

// Central-difference Jacobian of a vector-valued map R^p -> R^k (k x p).
template <typename F>
Eigen::MatrixXd central_jacobian(F&& f, const Eigen::VectorXd& theta) {
  const Eigen::Index p = theta.size();
  Eigen::MatrixXd jac;
  for (Eigen::Index c = 0; c < p; ++c) {
    const double h = fd_step(theta[c]);
    Eigen::VectorXd up = theta;
    Eigen::VectorXd dn = theta;
    up[c] += h;
    dn[c] -= h;
    const Eigen::VectorXd col = (f(up) - f(dn)) / (2.0 * h);
    if (c == 0) jac.resize(col.size(), p);
    jac.col(c) = col;
  }
  return jac;
}

}  // namespace dmcle
