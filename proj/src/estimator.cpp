#include "dmcle/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmcle/errors.hpp"

namespace dmcle {

namespace {

// Rounding slack when comparing composite log-likelihood values.
double ascent_slack(double f) { return 1e-13 * (1.0 + std::abs(f)); }

void check_weights(const CompositeDesign& design, const Eigen::VectorXd& w) {
  if (static_cast<std::size_t>(w.size()) != design.num_units()) {
    throw ValidationError("weight vector has " + std::to_string(w.size()) + " entries, design has " +
                          std::to_string(design.num_units()) + " units");
  }
  validate_weights(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

void check_theta(const CompositeDesign& design, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != design.param_dim()) {
    throw ValidationError("parameter has dimension " + std::to_string(theta.size()) +
                          ", design expects " + std::to_string(design.param_dim()));
  }
  if (!theta.allFinite()) throw ValidationError("parameter contains non-finite entries");
}

// Ascent direction from the weighted Hessian: Newton where it is negative
// definite, otherwise eigenvalues are reflected and floored.
Eigen::VectorXd ascent_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-0.5 * (hess + hess.transpose()));
  Eigen::VectorXd lam = eig.eigenvalues().cwiseAbs();
  const double scale = std::max(lam.maxCoeff(), 1e-300);
  const double floor = 1e-10 * scale;
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = std::max(lam[i], floor);
  const Eigen::MatrixXd& v = eig.eigenvectors();
  return v * (v.transpose() * grad).cwiseQuotient(lam);
}

}  // namespace

double composite_loglik(const CompositeDesign& design, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& weights) {
  check_weights(design, weights);
  check_theta(design, theta);
  return weights.dot(design.loglik_values(theta));
}

Eigen::VectorXd weighted_score(const CompositeDesign& design, const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& weights) {
  check_weights(design, weights);
  check_theta(design, theta);
  return design.scores(theta) * weights;
}

Eigen::MatrixXd weighted_hessian(const CompositeDesign& design, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& weights) {
  const auto p = static_cast<Eigen::Index>(design.param_dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t j = 0; j < design.num_units(); ++j) {
    const double w = weights[static_cast<Eigen::Index>(j)];
    if (w == 0.0) continue;
    h += w * design.unit(j).hessian(theta);
  }
  return h;
}

double profiled_loglik(const CompositeDesign& design, const Eigen::VectorXd& theta, double xi) {
  check_theta(design, theta);
  const Eigen::VectorXd ell = design.loglik_values(theta);
  return solve_alpha1(ell, xi).weights.dot(ell);
}

MStepResult solve_weighted_score(const CompositeDesign& design, const Eigen::VectorXd& weights,
                                 const Eigen::VectorXd& theta0, const FitOptions& options) {
  check_weights(design, weights);
  check_theta(design, theta0);
  MStepResult out;
  out.theta = theta0;
  double f = weights.dot(design.loglik_values(out.theta));
  for (int it = 0; it <= options.max_inner; ++it) {
    const Eigen::VectorXd grad = design.scores(out.theta) * weights;
    out.score_norm = grad.lpNorm<Eigen::Infinity>();
    out.iterations = it;
    if (!std::isfinite(out.score_norm)) {
      out.message = "weighted score is not finite";
      return out;
    }
    if (out.score_norm <= options.score_tol) {
      out.converged = true;
      return out;
    }
    if (it == options.max_inner) break;

    const Eigen::VectorXd dir = ascent_direction(weighted_hessian(design, out.theta, weights), grad);
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, step *= 0.5) {
      const Eigen::VectorXd trial = out.theta + step * dir;
      double f_trial = 0.0;
      try {
        f_trial = weights.dot(design.loglik_values(trial));
      } catch (const DomainError&) {
        continue;
      }
      if (std::isfinite(f_trial) && f_trial >= f - ascent_slack(f)) {
        out.theta = trial;
        f = f_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.message = "step halving failed to increase the composite log-likelihood (score norm " +
                    std::to_string(out.score_norm) + ")";
      return out;
    }
  }
  out.message = "inner Newton reached " + std::to_string(options.max_inner) +
                " iterations (score norm " + std::to_string(out.score_norm) + ")";
  return out;
}

MStepResult fit_uniform(const CompositeDesign& design, const Eigen::VectorXd& theta0,
                        const FitOptions& options) {
  const auto m = static_cast<Eigen::Index>(design.num_units());
  return solve_weighted_score(design, Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)),
                              theta0, options);
}

FitResult fit_dmcle(const CompositeDesign& design, double xi, const Eigen::VectorXd& theta0,
                    const FitOptions& options) {
  check_theta(design, theta0);
  FitResult fit;
  fit.xi = xi;
  fit.theta_hat = theta0;

  Eigen::VectorXd ell = design.loglik_values(theta0);
  TiltSolution tilt = solve_alpha1(ell, xi);
  fit.trace.push_back({theta0, tilt.weights, tilt.weights.dot(ell)});

  for (int t = 1; t <= options.max_outer; ++t) {
    fit.outer_iterations = t;
    MStepResult step = solve_weighted_score(design, tilt.weights, fit.theta_hat, options);
    if (!step.converged) {
      fit.message = "outer iteration " + std::to_string(t) + ": " + step.message;
      break;
    }
    fit.theta_hat = step.theta;
    ell = design.loglik_values(fit.theta_hat);
    TiltSolution next = solve_alpha1(ell, xi);
    const double change = (next.weights - tilt.weights).norm() / tilt.weights.norm();
    tilt = std::move(next);
    fit.trace.push_back({fit.theta_hat, tilt.weights, tilt.weights.dot(ell)});
    if (change < options.weight_tol) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged && fit.message.empty()) {
    fit.message = "weights did not settle within " + std::to_string(options.max_outer) +
                  " outer iterations";
  }

  fit.weights = tilt.weights;
  fit.alpha1 = tilt.alpha1;
  fit.composite_loglik = tilt.weights.dot(ell);
  fit.score_norm = (design.scores(fit.theta_hat) * fit.weights).lpNorm<Eigen::Infinity>();
  return fit;
}

std::vector<double> default_xi_grid(std::size_t m) {
  std::vector<double> grid;
  const double cap = std::log(static_cast<double>(m));
  for (int i = 0; i <= 13; ++i) {
    const double xi = 0.05 * i;
    if (xi < cap) grid.push_back(xi);
  }
  if (std::log(2.0) < cap) grid.push_back(std::log(2.0));
  return grid;
}

std::vector<double> make_xi_grid(double start, double step, double end) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(end) || end < start) {
    throw ConfigError("xi grid needs start <= end and step > 0");
  }
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double xi = start + step * i;
    if (xi > end + 1e-12) break;
    grid.push_back(xi);
  }
  return grid;
}

XiSelectionResult select_xi(const CompositeDesign& design, const std::vector<double>& grid,
                            std::optional<double> tau, const Eigen::VectorXd& theta0,
                            const FitOptions& options) {
  if (grid.size() < 2) {
    throw SelectionError("xi selection needs at least two grid points to compare");
  }
  if (grid.front() != 0.0) throw SelectionError("xi grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw SelectionError("xi grid must be strictly increasing");
  }
  if (tau && !(*tau >= 0.0)) throw SelectionError("tau must be nonnegative");

  XiSelectionResult res;
  res.grid = grid;
  Eigen::VectorXd start = theta0;
  for (double xi : grid) {
    FitResult fit = fit_dmcle(design, xi, start, options);
    res.estimates.push_back(fit.theta_hat);
    res.valid.push_back(fit.converged);
    if (fit.converged) start = fit.theta_hat;
  }
  if (std::none_of(res.valid.begin(), res.valid.end(), [](bool v) { return v; })) {
    throw SelectionError("no fit along the xi grid converged");
  }
  if (tau) {
    res.tau = *tau;
  } else {
    if (!res.valid.front()) {
      throw SelectionError("the xi = 0 fit did not converge; default tau is undefined");
    }
    res.tau = 0.05 * res.estimates.front().norm();
  }

  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!res.valid[i] || !res.valid[i - 1]) continue;
    if ((res.estimates[i] - res.estimates[i - 1]).norm() < res.tau) {
      res.chosen_index = i;
      res.chosen_xi = grid[i];
      res.selected = true;
      return res;
    }
  }
  for (std::size_t i = grid.size(); i-- > 0;) {
    if (res.valid[i]) {
      res.chosen_index = i;
      res.chosen_xi = grid[i];
      break;
    }
  }
  return res;
}

Eigen::MatrixXd cpp_profile(const CompositeDesign& design, const std::vector<double>& grid,
                            const Eigen::VectorXd& theta0, const FitOptions& options) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(grid.size()),
                       static_cast<Eigen::Index>(design.num_units()));
  Eigen::VectorXd start = theta0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    FitResult fit = fit_dmcle(design, grid[i], start, options);
    if (!fit.converged) {
      throw ConvergenceError("compatibility profile: fit at xi = " + std::to_string(grid[i]) +
                  " did not converge: " + fit.message);
    }
    rows.row(static_cast<Eigen::Index>(i)) = fit.weights.transpose();
    start = fit.theta_hat;
  }
  return rows;
}

double max_bias_bound(double delta, int m, int m_star, double alpha1_star, double c1, double c2,
                      double h1_theta0) {
  if (m_star == 0) return 0.0;
  if (m < 2 || m_star < 0 || 2 * m_star >= m) {
    throw ValidationError("max-bias bound needs 0 <= m_star < m / 2");
  }
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(h1_theta0 > 0.0) || !(alpha1_star >= 0.0)) {
    throw ValidationError("max-bias bound needs c1, c2, H1 > 0 and alpha1 >= 0");
  }
  const double ratio = static_cast<double>(m) / static_cast<double>(m_star) - 1.0;
  // Compatible units out-weigh the drifted ones by exp(alpha1 * delta^2 * H1 / 2).
  const double separation = std::exp(alpha1_star * delta * delta * h1_theta0 / 2.0);
  return std::abs(delta) / (1.0 + (c1 / c2) * ratio * separation);
}

}  // namespace dmcle
