#pragma once

// Independent normal variates with a common mean and column-specific
// variances, fitted through the one-wise (marginal) composite likelihood.
//
// Generic parametrization: theta = (mu, log sigma_1^2, ..., log sigma_m^2);
// unit j depends on theta[0] and theta[1 + j].

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmcle/design.hpp"

namespace dmcle {

class HeteroLocationUnit final : public SubLikelihood {
 public:
  HeteroLocationUnit(const Eigen::MatrixXd& data, Eigen::Index column, Eigen::Index num_columns,
                     std::string label = {});

  std::string label() const override { return label_; }
  std::size_t param_dim() const override { return static_cast<std::size_t>(num_columns_ + 1); }
  std::size_t num_obs() const override { return static_cast<std::size_t>(x_.size()); }

  Eigen::VectorXd per_obs_loglik(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd per_obs_score(const Eigen::VectorXd& theta) const override;
  double loglik_avg(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const override;

 private:
  Eigen::VectorXd x_;
  Eigen::Index column_;
  Eigen::Index num_columns_;
  std::string label_;
};

// One unit per column; labels default to "col_<j+1>".
CompositeDesign make_hetero_location_design(const Eigen::MatrixXd& data,
                                            const std::vector<std::string>& labels = {});

// Grand mean and the log of each column's mean squared deviation from it.
Eigen::VectorXd hetero_location_initial(const Eigen::MatrixXd& data);

enum class LocationUpdate {
  // mu <- sum_j w_j(mu) xbar_j
  kPlain,
  // mu <- sum_j (w_j / s_j^2) xbar_j / sum_j (w_j / s_j^2), the stationary
  // point of the generic one-wise composite likelihood
  kPrecisionWeighted,
};

struct LocationFit {
  double mu = 0.0;
  Eigen::VectorXd sigma2;   // n^-1 sum_i (x_ij - mu)^2
  Eigen::VectorXd weights;
  double alpha1 = 0.0;
  int sweeps = 0;
  bool converged = false;
};

// Fixed-point iteration for the location estimate, re-solving the tilt at
// every sweep on the profiled sub-likelihoods -(1/2)(log s_j^2(mu) + 1).
LocationFit hetero_location_fixed_point(const Eigen::MatrixXd& data, double xi, double mu0,
                                        LocationUpdate update = LocationUpdate::kPlain,
                                        double tol = 1e-10, int max_sweeps = 500);

// Weighted mean of column means with weights proportional to 1 / S_j^2.
double inverse_variance_mean(const Eigen::MatrixXd& data);

}  // namespace dmcle
