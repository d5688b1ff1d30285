#include "dmcle/models/smith.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "dmcle/errors.hpp"

namespace dmcle {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

void check_spd(const Eigen::Matrix2d& sigma) {
  if (!sigma.allFinite() || std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * sigma.norm() ||
      !(sigma(0, 0) > 0.0) || !(sigma.determinant() > 0.0)) {
    throw DomainError("Sigma must be symmetric positive definite");
  }
}

void check_z(double z_j, double z_k) {
  if (!(z_j > 0.0) || !(z_k > 0.0) || !std::isfinite(z_j) || !std::isfinite(z_k)) {
    throw DomainError("Frechet observations must be positive and finite");
  }
}

// a(h) from the log-Cholesky vector: |L^-1 h|.
double a_from_params(const Eigen::VectorXd& theta, const Eigen::Vector2d& h) {
  if (theta.size() != 3) throw ValidationError("Smith parameter must have 3 entries");
  if (!theta.allFinite() || std::abs(theta[0]) > 300.0 || std::abs(theta[2]) > 300.0) {
    throw DomainError("Smith parameter out of range");
  }
  const double l11 = std::exp(theta[0]);
  const double l21 = theta[1];
  const double l22 = std::exp(theta[2]);
  const double y1 = h[0] / l11;
  const double y2 = (h[1] - l21 * y1) / l22;
  const double a = std::hypot(y1, y2);
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a(h) is not positive and finite");
  return a;
}

}  // namespace

Eigen::Vector3d smith_to_unconstrained(const Eigen::Matrix2d& sigma) {
  check_spd(sigma);
  const double l11 = std::sqrt(sigma(0, 0));
  const double l21 = sigma(1, 0) / l11;
  const double l22 = std::sqrt(sigma(1, 1) - l21 * l21);
  return {std::log(l11), l21, std::log(l22)};
}

Eigen::Matrix2d smith_from_unconstrained(const Eigen::Vector3d& params) {
  Eigen::Matrix2d l;
  l << std::exp(params[0]), 0.0, params[1], std::exp(params[2]);
  return l * l.transpose();
}

double smith_a(const Eigen::Vector2d& h, const Eigen::Matrix2d& sigma) {
  check_spd(sigma);
  const double q = h.dot(sigma.llt().solve(h));
  if (!(q > 0.0)) throw DomainError("station offset h must be nonzero");
  return std::sqrt(q);
}

double smith_pair_cdf(double z_j, double z_k, const Eigen::Vector2d& h, const Eigen::Matrix2d& sigma) {
  check_z(z_j, z_k);
  const double a = smith_a(h, sigma);
  const double g1 = 0.5 * a + std::log(z_k / z_j) / a;
  const double g2 = a - g1;
  return std::exp(-(norm_cdf(g1) / z_j + norm_cdf(g2) / z_k));
}

namespace {

// log Phi(x); the asymptotic series takes over where erfc underflows.
double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  const double r = 1.0 / (x * x);
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-x) +
         std::log1p(-r + 3.0 * r * r - 15.0 * r * r * r);
}

struct DensityParts {
  double v;            // exponent of the cdf
  double log_bracket;  // density = exp(-v) * exp(log_bracket)
};

// Uses phi(g1) / z_j = phi(g2) / z_k, which removes the cancelling terms of
// -dV/dz_j and -dV/dz_k:
//   bracket = Phi(g1) Phi(g2) / (z_j z_k)^2 + phi(g1) / (a z_j^2 z_k).
DensityParts density_parts(double z_j, double z_k, double a) {
  check_z(z_j, z_k);
  const double g1 = 0.5 * a + std::log(z_k / z_j) / a;
  const double g2 = a - g1;
  const double lzj = std::log(z_j);
  const double lzk = std::log(z_k);
  const double t1 = log_norm_cdf(g1) + log_norm_cdf(g2) - 2.0 * (lzj + lzk);
  const double t2 = -0.5 * g1 * g1 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(a) - 2.0 * lzj - lzk;
  const double hi = std::max(t1, t2);
  return {norm_cdf(g1) / z_j + norm_cdf(g2) / z_k, hi + std::log1p(std::exp(std::min(t1, t2) - hi))};
}

}  // namespace

double smith_pair_logdensity_a(double z_j, double z_k, double a) {
  const DensityParts p = density_parts(z_j, z_k, a);
  const double out = -p.v + p.log_bracket;
  if (!std::isfinite(out)) {
    throw DomainError("Smith log density is not finite at z = (" + std::to_string(z_j) + ", " +
                      std::to_string(z_k) + ")");
  }
  return out;
}

double smith_pair_density(double z_j, double z_k, const Eigen::Vector2d& h,
                          const Eigen::Matrix2d& sigma) {
  const DensityParts p = density_parts(z_j, z_k, smith_a(h, sigma));
  return std::exp(-p.v + p.log_bracket);
}

SmithPairUnit::SmithPairUnit(const Eigen::MatrixXd& z, Eigen::Index j, Eigen::Index k,
                             const Eigen::Vector2d& s_j, const Eigen::Vector2d& s_k, std::string label)
    : zj_(z.col(j)), zk_(z.col(k)), h_(s_j - s_k), label_(std::move(label)) {
  if (h_.squaredNorm() == 0.0) {
    throw ValidationError("stations " + label_ + " share coordinates");
  }
  if ((zj_.array() <= 0.0).any() || (zk_.array() <= 0.0).any()) {
    throw DataError("Frechet observations must be positive (" + label_ + ")");
  }
}

Eigen::VectorXd SmithPairUnit::per_obs_loglik(const Eigen::VectorXd& theta) const {
  const double a = a_from_params(theta, h_);
  Eigen::VectorXd out(zj_.size());
  for (Eigen::Index i = 0; i < zj_.size(); ++i) out[i] = smith_pair_logdensity_a(zj_[i], zk_[i], a);
  return out;
}

double SmithPairUnit::loglik_avg(const Eigen::VectorXd& theta) const {
  const double a = a_from_params(theta, h_);
  double total = 0.0;
  for (Eigen::Index i = 0; i < zj_.size(); ++i) total += smith_pair_logdensity_a(zj_[i], zk_[i], a);
  return total / static_cast<double>(zj_.size());
}

Eigen::MatrixXd SmithPairUnit::per_obs_score(const Eigen::VectorXd& theta) const {
  return central_jacobian([this](const Eigen::VectorXd& t) { return per_obs_loglik(t); }, theta);
}

Eigen::MatrixXd SmithPairUnit::hessian(const Eigen::VectorXd& theta) const {
  // Second differences of the average log-likelihood; a wider step than the
  // score keeps rounding noise below the truncation error.
  const Eigen::Index p = theta.size();
  Eigen::VectorXd step(p);
  for (Eigen::Index c = 0; c < p; ++c) step[c] = 1e-4 * (1.0 + std::abs(theta[c]));
  auto f = [this](const Eigen::VectorXd& t) { return loglik_avg(t); };
  const double f0 = f(theta);
  Eigen::MatrixXd h(p, p);
  for (Eigen::Index r = 0; r < p; ++r) {
    Eigen::VectorXd up = theta;
    Eigen::VectorXd dn = theta;
    up[r] += step[r];
    dn[r] -= step[r];
    h(r, r) = (f(up) - 2.0 * f0 + f(dn)) / (step[r] * step[r]);
    for (Eigen::Index c = r + 1; c < p; ++c) {
      Eigen::VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
      pp[r] += step[r];
      pp[c] += step[c];
      pm[r] += step[r];
      pm[c] -= step[c];
      mp[r] -= step[r];
      mp[c] += step[c];
      mm[r] -= step[r];
      mm[c] -= step[c];
      h(r, c) = h(c, r) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step[r] * step[c]);
    }
  }
  return h;
}

CompositeDesign make_smith_design(const Eigen::MatrixXd& z, const Eigen::MatrixXd& coords,
                                  const std::vector<std::string>& names) {
  if (coords.rows() != z.cols() || coords.cols() != 2) {
    throw ValidationError("coordinates must be a d x 2 matrix matching the data columns");
  }
  if (static_cast<Eigen::Index>(names.size()) != z.cols()) {
    throw ValidationError("one station name per data column is required");
  }
  std::vector<UnitPtr> units;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index k = j + 1; k < z.cols(); ++k) {
      units.push_back(std::make_shared<SmithPairUnit>(
          z, j, k, coords.row(j).transpose(), coords.row(k).transpose(),
          "pair_" + names[static_cast<std::size_t>(j)] + "_" + names[static_cast<std::size_t>(k)]));
    }
  }
  return CompositeDesign(z, std::move(units));
}

namespace {

// Inverse standard normal CDF by Newton on erfc; adequate for a start value.
double norm_quantile(double p) {
  double x = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double step = (norm_cdf(x) - p) / std::max(norm_pdf(x), 1e-300);
    x -= step;
    if (std::abs(step) < 1e-12) break;
  }
  return x;
}

}  // namespace

Eigen::VectorXd smith_initial(const Eigen::MatrixXd& z, const Eigen::MatrixXd& coords) {
  std::vector<double> scales;
  const double n = static_cast<double>(z.rows());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index k = j + 1; k < z.cols(); ++k) {
      const double inv_sum = (z.col(j).cwiseMax(z.col(k))).cwiseInverse().sum();
      const double extremal = n / inv_sum;
      if (!(extremal > 1.0 && extremal < 2.0)) continue;
      const double a = 2.0 * norm_quantile(extremal / 2.0);
      const double h2 = (coords.row(j) - coords.row(k)).squaredNorm();
      if (a > 0.0 && h2 > 0.0) scales.push_back(h2 / (a * a));
    }
  }
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();
  if (!scales.empty()) {
    std::nth_element(scales.begin(), scales.begin() + static_cast<std::ptrdiff_t>(scales.size() / 2),
                     scales.end());
    const double s = scales[scales.size() / 2];
    if (std::isfinite(s) && s > 0.0) sigma *= s;
  }
  return smith_to_unconstrained(sigma);
}

Eigen::MatrixXd simulate_smith(const Eigen::MatrixXd& coords, const Eigen::Matrix2d& sigma,
                               std::size_t n, CounterRng& rng, std::size_t storms) {
  check_spd(sigma);
  const Eigen::Matrix2d prec = sigma.inverse();
  const double norm_const = 1.0 / (2.0 * std::numbers::pi * std::sqrt(sigma.determinant()));
  const double pad = 4.0 * std::sqrt(std::max(sigma(0, 0), sigma(1, 1)));
  const Eigen::Vector2d lo = coords.colwise().minCoeff().transpose().array() - pad;
  const Eigen::Vector2d hi = coords.colwise().maxCoeff().transpose().array() + pad;
  const double area = (hi - lo).prod();

  const auto d = coords.rows();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    double arrival = 0.0;
    for (std::size_t s = 0; s < storms; ++s) {
      arrival += rng.exponential();
      const double magnitude = area / arrival;
      const Eigen::Vector2d centre(lo[0] + (hi[0] - lo[0]) * rng.uniform(),
                                   lo[1] + (hi[1] - lo[1]) * rng.uniform());
      for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Vector2d diff = centre - coords.row(j).transpose();
        const double value = magnitude * norm_const * std::exp(-0.5 * diff.dot(prec * diff));
        auto& cell = z(static_cast<Eigen::Index>(i), j);
        cell = std::max(cell, value);
      }
    }
  }
  // Stations never reached by a storm get the smallest positive value seen.
  const double floor = z.array().maxCoeff() > 0.0 ? (z.array() > 0.0).select(z.array(), 1e300).minCoeff() : 1.0;
  return z.unaryExpr([floor](double v) { return v > 0.0 ? v : floor; });
}

}  // namespace dmcle
