#pragma once

// Smith (Gaussian storm) max-stable model on unit Frechet margins: bivariate
// distribution and density for a pair of stations, the pairwise
// sub-likelihood unit, and an approximate process simulator.
//
// With a(h) = sqrt(h' Sigma^-1 h), g1 = a/2 + log(z_k / z_j) / a, g2 = a - g1:
//   F(z_j, z_k) = exp(-V),  V = Phi(g1) / z_j + Phi(g2) / z_k,
// and the density is the mixed partial derivative of F.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmcle/design.hpp"
#include "dmcle/rng.hpp"

namespace dmcle {

// Log-Cholesky coordinates (log L11, L21, log L22) of a 2x2 SPD matrix.
Eigen::Vector3d smith_to_unconstrained(const Eigen::Matrix2d& sigma);
Eigen::Matrix2d smith_from_unconstrained(const Eigen::Vector3d& params);

// Mahalanobis length of the station offset h under Sigma.
double smith_a(const Eigen::Vector2d& h, const Eigen::Matrix2d& sigma);

double smith_pair_cdf(double z_j, double z_k, const Eigen::Vector2d& h, const Eigen::Matrix2d& sigma);
double smith_pair_density(double z_j, double z_k, const Eigen::Vector2d& h,
                          const Eigen::Matrix2d& sigma);
// Same as log(smith_pair_density) but takes a = a(h) directly.
double smith_pair_logdensity_a(double z_j, double z_k, double a);

// Pairwise sub-likelihood over stations (j, k); theta is the log-Cholesky
// vector of Sigma. Scores use central differences of the log density.
class SmithPairUnit final : public SubLikelihood {
 public:
  SmithPairUnit(const Eigen::MatrixXd& z, Eigen::Index j, Eigen::Index k, const Eigen::Vector2d& s_j,
                const Eigen::Vector2d& s_k, std::string label);

  std::string label() const override { return label_; }
  std::size_t param_dim() const override { return 3; }
  std::size_t num_obs() const override { return static_cast<std::size_t>(zj_.size()); }

  Eigen::VectorXd per_obs_loglik(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd per_obs_score(const Eigen::VectorXd& theta) const override;
  double loglik_avg(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const override;

  const Eigen::Vector2d& offset() const { return h_; }

 private:
  Eigen::VectorXd zj_;
  Eigen::VectorXd zk_;
  Eigen::Vector2d h_;
  std::string label_;
};

// All station pairs of an n x d Frechet-scale matrix; coords is d x 2.
// Labels are "pair_<name_j>_<name_k>".
CompositeDesign make_smith_design(const Eigen::MatrixXd& z, const Eigen::MatrixXd& coords,
                                  const std::vector<std::string>& names);

// Moment start: pairwise extremal coefficients n / sum_i 1/max(z_ij, z_ik)
// inverted through theta = 2 Phi(a/2) to an isotropic Sigma = s I (median of
// the per-pair s = |h|^2 / a^2). Falls back to the identity.
Eigen::VectorXd smith_initial(const Eigen::MatrixXd& z, const Eigen::MatrixXd& coords);

// Approximate draws of the process at the given stations: maxima over
// `storms` Poisson storms with centres uniform on the station bounding box
// padded by four storm standard deviations.
Eigen::MatrixXd simulate_smith(const Eigen::MatrixXd& coords, const Eigen::Matrix2d& sigma,
                               std::size_t n, CounterRng& rng, std::size_t storms = 5000);

}  // namespace dmcle
