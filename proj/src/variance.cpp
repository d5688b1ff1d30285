#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dmcle/errors.hpp"
#include "dmcle/estimator.hpp"

namespace dmcle {

namespace {

// Relative eigenvalue threshold below which H is treated as singular.
constexpr double kRankTolerance = 1e-12;

void require_nonsingular(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd abs_eig = eig.eigenvalues().cwiseAbs();
  const double smallest = abs_eig.minCoeff();
  if (!(smallest > kRankTolerance * std::max(abs_eig.maxCoeff(), 1e-300))) {
    throw RankDeficiencyError(
        "sensitivity matrix H is singular (smallest |eigenvalue| " + std::to_string(smallest) + ")",
        smallest);
  }
}

// n x p matrix of s_i = sum_j w_j u_j(Y_j^(i), theta).
Eigen::MatrixXd per_obs_weighted_scores(const CompositeDesign& design, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& weights) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(design.num_obs()),
                                            static_cast<Eigen::Index>(design.param_dim()));
  for (std::size_t j = 0; j < design.num_units(); ++j) {
    const double w = weights[static_cast<Eigen::Index>(j)];
    if (w == 0.0) continue;
    s += w * design.unit(j).per_obs_score(theta);
  }
  return s;
}

Eigen::MatrixXd plugin_k(const CompositeDesign& design, const FitResult& fit) {
  const Eigen::MatrixXd s = per_obs_weighted_scores(design, fit.theta_hat, fit.weights);
  const Eigen::MatrixXd centered = s.rowwise() - s.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(s.rows());
}

// Leave-one-out over observations, re-solving the weights on each reduced
// sample at theta_hat: K = (n - 1) sum_i (sbar_(-i) - sbar_(.))(...)^T.
Eigen::MatrixXd jackknife_k(const CompositeDesign& design, const FitResult& fit) {
  const auto n = static_cast<Eigen::Index>(design.num_obs());
  const auto m = static_cast<Eigen::Index>(design.num_units());
  const auto p = static_cast<Eigen::Index>(design.param_dim());
  const double nd = static_cast<double>(n);

  Eigen::MatrixXd loglik(n, m);
  std::vector<Eigen::MatrixXd> scores;
  scores.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    const SubLikelihood& unit = design.unit(static_cast<std::size_t>(j));
    loglik.col(j) = unit.per_obs_loglik(fit.theta_hat);
    scores.push_back(unit.per_obs_score(fit.theta_hat));
  }
  const Eigen::RowVectorXd ell_sum = loglik.colwise().sum();
  Eigen::MatrixXd score_sum(p, m);
  for (Eigen::Index j = 0; j < m; ++j) score_sum.col(j) = scores[static_cast<std::size_t>(j)].colwise().sum().transpose();

  Eigen::MatrixXd loo(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd ell = ((ell_sum - loglik.row(i)) / (nd - 1.0)).transpose();
    const Eigen::VectorXd w = solve_alpha1(ell, fit.xi).weights;
    Eigen::VectorXd sbar = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::VectorXd uj =
          (score_sum.col(j) - scores[static_cast<std::size_t>(j)].row(i).transpose()) / (nd - 1.0);
      sbar += w[j] * uj;
    }
    loo.row(i) = sbar.transpose();
  }
  const Eigen::MatrixXd centered = loo.rowwise() - loo.colwise().mean();
  return (nd - 1.0) * centered.transpose() * centered;
}

}  // namespace

SandwichResult sandwich_variance(const CompositeDesign& design, const FitResult& fit,
                                 VarianceMethod method) {
  if (!fit.converged) throw ValidationError("sandwich variance requires a converged fit");
  const auto p = static_cast<Eigen::Index>(design.param_dim());

  SandwichResult out;
  out.H = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t j = 0; j < design.num_units(); ++j) {
    const double w = fit.weights[static_cast<Eigen::Index>(j)];
    if (w == 0.0) continue;
    const SubLikelihood& unit = design.unit(j);
    const Eigen::VectorXd u = unit.score(fit.theta_hat);
    out.H += w * (unit.hessian(fit.theta_hat) + fit.alpha1 * u * u.transpose());
  }
  out.H = 0.5 * (out.H + out.H.transpose());
  require_nonsingular(out.H);

  out.K = method == VarianceMethod::kPlugin ? plugin_k(design, fit) : jackknife_k(design, fit);
  const Eigen::MatrixXd h_inv = out.H.inverse();
  out.covariance = h_inv * out.K * h_inv / static_cast<double>(design.num_obs());
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.se = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

double clic(const CompositeDesign& design, const FitResult& fit) {
  if (fit.H.size() == 0 || fit.K.size() == 0) {
    throw ValidationError("CLIC requires the fit's H and K matrices; call attach_inference first");
  }
  require_nonsingular(fit.H);
  const double n = static_cast<double>(design.num_obs());
  const double ell = fit.weights.dot(design.loglik_values(fit.theta_hat));
  const double penalty = (-fit.H).partialPivLu().solve(fit.K).trace();
  return -2.0 * n * ell + penalty;
}

void attach_inference(const CompositeDesign& design, FitResult& fit, VarianceMethod method) {
  SandwichResult s = sandwich_variance(design, fit, method);
  fit.H = std::move(s.H);
  fit.K = std::move(s.K);
  fit.se = std::move(s.se);
  fit.clic = clic(design, fit);
}

}  // namespace dmcle
