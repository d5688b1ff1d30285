#pragma once

// Pairwise likelihood for the zero-mean, unit-variance normal model with a
// single common correlation rho. theta = (rho).

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "dmcle/design.hpp"

namespace dmcle {

// Sufficient statistics of one column pair: sums of squares and cross products.
struct PairStats {
  double ss_jj = 0.0;
  double ss_kk = 0.0;
  double ss_jk = 0.0;
  std::size_t n = 0;
};

PairStats pair_stats(const Eigen::MatrixXd& data, Eigen::Index j, Eigen::Index k);

// |rho| may not exceed this; beyond it the pair log-likelihood is a domain error.
inline constexpr double kMaxAbsCorrelation = 1.0 - 1e-8;

// Average (per observation) pair log-likelihood, constants dropped:
// -(1/2) log(1 - rho^2) - (ss_jj + ss_kk) / (2 n (1 - rho^2)) + rho ss_jk / (n (1 - rho^2)).
double equicorr_pair_loglik(const PairStats& s, double rho);
double equicorr_pair_score(const PairStats& s, double rho);
double equicorr_pair_hessian(const PairStats& s, double rho);

class EquiCorrPairUnit final : public SubLikelihood {
 public:
  // Columns j and k (0-based) of data; label defaults to "pair_<j+1>_<k+1>".
  EquiCorrPairUnit(const Eigen::MatrixXd& data, Eigen::Index j, Eigen::Index k,
                   std::string label = {});

  std::string label() const override { return label_; }
  std::size_t param_dim() const override { return 1; }
  std::size_t num_obs() const override { return static_cast<std::size_t>(x_.size()); }

  Eigen::VectorXd per_obs_loglik(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd per_obs_score(const Eigen::VectorXd& theta) const override;
  double loglik_avg(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd score(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const override;

  const PairStats& stats() const { return stats_; }

 private:
  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
  PairStats stats_;
  std::string label_;
};

// All d(d-1)/2 column pairs in lexicographic order.
CompositeDesign make_equicorr_design(const Eigen::MatrixXd& data);

// Average off-diagonal sample correlation (moment start for the fit).
Eigen::VectorXd equicorr_initial(const Eigen::MatrixXd& data);

// Full d-variate equicorrelation log-likelihood with unit variances, per
// observation, constants dropped.
double equicorr_full_loglik(const Eigen::MatrixXd& data, double rho);

struct ScalarMaxResult {
  double argmax = 0.0;
  bool converged = false;
};

// Maximum likelihood rho over (-1/(d-1) + 1e-6, 1 - 1e-6) by one-dimensional
// Newton with step halving.
ScalarMaxResult equicorr_mle(const Eigen::MatrixXd& data);

}  // namespace dmcle
