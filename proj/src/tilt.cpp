#include "dmcle/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dmcle/errors.hpp"

namespace dmcle {

namespace {

constexpr double kSumTolerance = 1e-12;
// Doubling the bracket past this means the target sits on the numerical
// plateau just below the supremum.
constexpr double kMaxAlpha1 = 1e250;

void validate_ell(std::span<const double> ell) {
  if (ell.size() < 2) {
    throw ValidationError("at least two sub-likelihood values are required, got " +
                          std::to_string(ell.size()));
  }
  for (std::size_t j = 0; j < ell.size(); ++j) {
    if (!std::isfinite(ell[j])) {
      throw ValidationError("sub-likelihood value " + std::to_string(j) + " is not finite");
    }
  }
}

// Tilted family evaluated on max-shifted values e_j = ell_j - max(ell) <= 0.
struct TiltState {
  Eigen::VectorXd weights;
  double log_norm = 0.0;  // log sum_j exp(alpha1 * e_j)
  double kl = 0.0;
  double slope = 0.0;  // d kl / d alpha1 = alpha1 * Var_w(e)
};

TiltState evaluate(const std::vector<double>& shifted, double alpha1) {
  const auto m = static_cast<Eigen::Index>(shifted.size());
  TiltState st;
  if (alpha1 == 0.0) {
    st.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    st.log_norm = std::log(static_cast<double>(m));
    return st;
  }
  st.weights.resize(m);
  double total = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double v = std::exp(alpha1 * shifted[j]);
    st.weights[j] = v;
    total += v;
  }
  st.log_norm = std::log(total);
  double kept = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    st.weights[j] /= total;
    if (st.weights[j] < kWeightFloor) st.weights[j] = 0.0;
    kept += st.weights[j];
  }
  st.weights /= kept;

  double mean = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) mean += st.weights[j] * shifted[j];
  double var = 0.0;
  double plogp = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double w = st.weights[j];
    if (w == 0.0) continue;
    const double d = shifted[j] - mean;
    var += w * d * d;
    plogp += w * (alpha1 * shifted[j] - st.log_norm);
  }
  st.kl = std::max(0.0, plogp + std::log(static_cast<double>(m)));
  st.slope = alpha1 * var;
  return st;
}

std::vector<double> shift_by_max(std::span<const double> ell) {
  const double top = *std::max_element(ell.begin(), ell.end());
  std::vector<double> shifted(ell.begin(), ell.end());
  for (double& v : shifted) v -= top;
  return shifted;
}

TiltSolution make_solution(std::span<const double> ell, double alpha1, const TiltState& st) {
  const double top = *std::max_element(ell.begin(), ell.end());
  TiltSolution sol;
  sol.alpha1 = alpha1;
  sol.alpha2 = std::exp(-(alpha1 * top + st.log_norm));
  sol.weights = st.weights;
  sol.achieved_xi = alpha1 == 0.0 ? 0.0 : st.kl;
  return sol;
}

}  // namespace

void validate_weights(std::span<const double> w) {
  if (w.size() < 2) {
    throw ValidationError("weight vector needs at least two entries, got " +
                          std::to_string(w.size()));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (!(w[j] >= 0.0) || !std::isfinite(w[j])) {
      throw ValidationError("weight " + std::to_string(j) + " is negative or not finite");
    }
    sum += w[j];
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError("weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

double kl_divergence(std::span<const double> w) {
  validate_weights(w);
  const double m = static_cast<double>(w.size());
  double kl = 0.0;
  for (double wj : w) {
    if (wj > 0.0) kl += wj * std::log(m * wj);
  }
  return std::clamp(kl, 0.0, std::log(m));
}

double kl_divergence(const Eigen::VectorXd& w) {
  return kl_divergence(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

Eigen::VectorXd tilt_weights(std::span<const double> ell, double alpha1) {
  validate_ell(ell);
  if (!std::isfinite(alpha1)) throw ValidationError("alpha1 must be finite");
  return evaluate(shift_by_max(ell), alpha1).weights;
}

Eigen::VectorXd tilt_weights(const Eigen::VectorXd& ell, double alpha1) {
  return tilt_weights(std::span<const double>(ell.data(), static_cast<std::size_t>(ell.size())),
                      alpha1);
}

double max_attainable_xi(std::span<const double> ell) {
  validate_ell(ell);
  const double top = *std::max_element(ell.begin(), ell.end());
  const auto ties = std::count(ell.begin(), ell.end(), top);
  return std::log(static_cast<double>(ell.size()) / static_cast<double>(ties));
}

TiltSolution solve_alpha1(std::span<const double> ell, double xi) {
  validate_ell(ell);
  const double m = static_cast<double>(ell.size());
  if (!std::isfinite(xi) || xi < 0.0) {
    throw InfeasibleDivergenceError("divergence xi must be finite and >= 0");
  }
  if (xi >= std::log(m)) {
    throw InfeasibleDivergenceError("divergence xi = " + std::to_string(xi) +
                                    " must be below log m = " + std::to_string(std::log(m)));
  }
  const auto shifted = shift_by_max(ell);
  if (xi == 0.0) return make_solution(ell, 0.0, evaluate(shifted, 0.0));

  const bool all_equal = std::all_of(shifted.begin(), shifted.end(),
                                     [](double e) { return e == 0.0; });
  if (all_equal) {
    throw DegenerateTiltError("all sub-likelihood values are equal; divergence " +
                              std::to_string(xi) + " is unreachable");
  }
  const double sup = max_attainable_xi(ell);
  if (xi >= sup) {
    throw InfeasibleDivergenceError("divergence xi = " + std::to_string(xi) +
                                    " exceeds the supremum " + std::to_string(sup) +
                                    " reachable with tied maximal sub-likelihoods");
  }

  double lo = 0.0;
  double hi = 1.0;
  TiltState at_hi = evaluate(shifted, hi);
  while (at_hi.kl < xi) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxAlpha1) {
      throw InfeasibleDivergenceError("divergence xi = " + std::to_string(xi) +
                                      " is numerically unreachable (too close to the supremum)");
    }
    at_hi = evaluate(shifted, hi);
  }

  double alpha = 0.5 * (lo + hi);
  double best_alpha = hi;
  TiltState best = at_hi;
  for (int iter = 0; iter < kTiltMaxIterations; ++iter) {
    TiltState st = evaluate(shifted, alpha);
    const double f = st.kl - xi;
    if (std::abs(f) < std::abs(best.kl - xi)) {
      best = st;
      best_alpha = alpha;
    }
    if (f == 0.0) break;
    if (f < 0.0) {
      lo = alpha;
    } else {
      hi = alpha;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    double next = st.slope > 0.0 ? alpha - f / st.slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    } else if (std::abs(next - alpha) <= 2.0 * std::numeric_limits<double>::epsilon() * alpha) {
      break;
    }
    alpha = next;
  }
  return make_solution(ell, best_alpha, best);
}

TiltSolution solve_alpha1(const Eigen::VectorXd& ell, double xi) {
  return solve_alpha1(std::span<const double>(ell.data(), static_cast<std::size_t>(ell.size())),
                      xi);
}

}  // namespace dmcle
