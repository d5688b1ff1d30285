#pragma once

// Discriminative maximum composite likelihood estimation: alternate the
// tilted-weight update with a weighted-score M-step until the weights settle.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmcle/design.hpp"
#include "dmcle/tilt.hpp"

namespace dmcle {

struct FitOptions {
  // Outer loop stops when ||w(t+1) - w(t)|| / ||w(t)|| < weight_tol.
  double weight_tol = 1e-8;
  int max_outer = 200;
  // Inner damped Newton declares convergence at ||weighted score||_inf <= score_tol.
  double score_tol = 1e-9;
  int max_inner = 100;
  int max_halvings = 8;
};

struct TraceEntry {
  Eigen::VectorXd theta;
  Eigen::VectorXd weights;
  double composite_loglik = 0.0;  // sum_j w_j ell_j(theta) with this entry's weights
};

struct MStepResult {
  Eigen::VectorXd theta;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
  std::string message;
};

enum class VarianceMethod { kPlugin, kJackknife };

struct FitResult {
  Eigen::VectorXd theta_hat;
  double xi = 0.0;
  Eigen::VectorXd weights;
  double alpha1 = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<TraceEntry> trace;
  // ||sum_j w_j u_nj(theta_hat)||_inf with the returned weights.
  double score_norm = 0.0;
  double composite_loglik = 0.0;

  // Filled by attach_inference().
  std::optional<Eigen::VectorXd> se;
  Eigen::MatrixXd H;
  Eigen::MatrixXd K;
  std::optional<double> clic;
};

struct SandwichResult {
  Eigen::MatrixXd H;
  Eigen::MatrixXd K;
  Eigen::MatrixXd covariance;  // H^-1 K H^-1 / n
  Eigen::VectorXd se;
};

struct XiSelectionResult {
  std::vector<double> grid;
  std::vector<Eigen::VectorXd> estimates;
  std::vector<bool> valid;
  double tau = 0.0;
  double chosen_xi = 0.0;
  std::size_t chosen_index = 0;
  // False when no consecutive pair moved less than tau; chosen_xi is then
  // the largest valid grid value.
  bool selected = false;
};

double composite_loglik(const CompositeDesign& design, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& weights);

Eigen::VectorXd weighted_score(const CompositeDesign& design, const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& weights);

// Hessian of theta -> composite_loglik(design, theta, weights) for fixed weights.
Eigen::MatrixXd weighted_hessian(const CompositeDesign& design, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& weights);

// theta -> ell_n(theta | w_n(theta)) with the weights re-solved at theta.
double profiled_loglik(const CompositeDesign& design, const Eigen::VectorXd& theta, double xi);

// Solves sum_j w_j u_nj(theta) = 0 for fixed weights by damped Newton with
// step halving on the composite log-likelihood.
MStepResult solve_weighted_score(const CompositeDesign& design, const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& theta0, const FitOptions& options = {});

// Uniform-weight composite likelihood estimate from theta0.
MStepResult fit_uniform(const CompositeDesign& design, const Eigen::VectorXd& theta0,
                        const FitOptions& options = {});

FitResult fit_dmcle(const CompositeDesign& design, double xi, const Eigen::VectorXd& theta0,
                    const FitOptions& options = {});

// Default tau: 5% of the norm of the first grid point's estimate.
XiSelectionResult select_xi(const CompositeDesign& design, const std::vector<double>& grid,
                            std::optional<double> tau, const Eigen::VectorXd& theta0,
                            const FitOptions& options = {});

// Row i holds the fitted weights at grid[i]; fits are warm-started along the grid.
Eigen::MatrixXd cpp_profile(const CompositeDesign& design, const std::vector<double>& grid,
                            const Eigen::VectorXd& theta0, const FitOptions& options = {});

// {0, 0.05, ..., 0.65, log 2}, truncated below log m.
std::vector<double> default_xi_grid(std::size_t m);
// Inclusive arithmetic grid start, start+step, ... <= end (+1e-12).
std::vector<double> make_xi_grid(double start, double step, double end);

SandwichResult sandwich_variance(const CompositeDesign& design, const FitResult& fit,
                                 VarianceMethod method = VarianceMethod::kPlugin);

// -2 n ell_n(theta_hat) + trace(J^-1 K) with J = -H. Requires fit.H and fit.K.
double clic(const CompositeDesign& design, const FitResult& fit);

// Fills se, H, K and clic on a converged fit.
void attach_inference(const CompositeDesign& design, FitResult& fit,
                      VarianceMethod method = VarianceMethod::kPlugin);

// Worst-case bias of the estimator under a location drift delta affecting
// m_star of m sub-models.
double max_bias_bound(double delta, int m, int m_star, double alpha1_star, double c1, double c2,
                      double h1_theta0);

}  // namespace dmcle
