#pragma once

// Weight-side mathematics: Kullback-Leibler divergence of a discrete weight
// vector from uniform weights, exponential tilting of sub-likelihood values,
// and the scalar root-finder mapping a target divergence to the tilting
// exponent.

#include <span>

#include <Eigen/Dense>

namespace dmcle {

// Solver limits for solve_alpha1.
inline constexpr double kTiltTolerance = 1e-10;
inline constexpr int kTiltMaxIterations = 200;
// Tilted weights below this are set to zero and the rest renormalized.
inline constexpr double kWeightFloor = 1e-300;

struct TiltSolution {
  double alpha1 = 0.0;  // tilting exponent, >= 0
  double alpha2 = 0.0;  // normalizer: w_j = alpha2 * exp(alpha1 * ell_j)
  Eigen::VectorXd weights;
  double achieved_xi = 0.0;
};

// Throws ValidationError unless w has m >= 2 nonnegative entries summing to 1.
void validate_weights(std::span<const double> w);

// sum_j w_j log(m w_j), with 0 log 0 = 0. In [0, log m].
double kl_divergence(std::span<const double> w);
double kl_divergence(const Eigen::VectorXd& w);

// w_j proportional to exp(alpha1 * ell_j), computed with a max shift.
Eigen::VectorXd tilt_weights(std::span<const double> ell, double alpha1);
Eigen::VectorXd tilt_weights(const Eigen::VectorXd& ell, double alpha1);

// Supremum of the KL divergence over alpha1 >= 0: log(m / #argmax ell).
double max_attainable_xi(std::span<const double> ell);

// Finds alpha1 >= 0 with kl_divergence(tilt_weights(ell, alpha1)) == xi.
//
// The divergence of the tilted family is strictly increasing in alpha1 on
// [0, inf) whenever ell has two distinct entries, so the root is bracketed by
// doubling from [0, 1] and then polished with a bracket-safeguarded Newton
// iteration (derivative alpha1 * Var_w(ell)) down to machine precision.
//
// Throws InfeasibleDivergenceError when xi < 0 or xi >= log m (or above the
// supremum reachable with tied maxima), and DegenerateTiltError when xi > 0
// but every ell_j is equal.
TiltSolution solve_alpha1(std::span<const double> ell, double xi);
TiltSolution solve_alpha1(const Eigen::VectorXd& ell, double xi);

}  // namespace dmcle
