#include "dmcle/models/equicorr.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "dmcle/errors.hpp"

namespace dmcle {

namespace {

void check_rho(double rho) {
  if (!std::isfinite(rho) || std::abs(rho) > kMaxAbsCorrelation) {
    throw DomainError("correlation " + std::to_string(rho) + " is outside (-1, 1)");
  }
}

double theta_rho(const Eigen::VectorXd& theta) {
  if (theta.size() != 1) throw ValidationError("equicorrelation parameter must be scalar");
  check_rho(theta[0]);
  return theta[0];
}

}  // namespace

PairStats pair_stats(const Eigen::MatrixXd& data, Eigen::Index j, Eigen::Index k) {
  PairStats s;
  s.ss_jj = data.col(j).squaredNorm();
  s.ss_kk = data.col(k).squaredNorm();
  s.ss_jk = data.col(j).dot(data.col(k));
  s.n = static_cast<std::size_t>(data.rows());
  return s;
}

double equicorr_pair_loglik(const PairStats& s, double rho) {
  check_rho(rho);
  const double n = static_cast<double>(s.n);
  const double q = 1.0 - rho * rho;
  return -0.5 * std::log(q) - (s.ss_jj + s.ss_kk) / (2.0 * n * q) + rho * s.ss_jk / (n * q);
}

double equicorr_pair_score(const PairStats& s, double rho) {
  check_rho(rho);
  const double n = static_cast<double>(s.n);
  const double a = (s.ss_jj + s.ss_kk) / n;
  const double b = s.ss_jk / n;
  const double q = 1.0 - rho * rho;
  return rho / q - a * rho / (q * q) + b * (1.0 + rho * rho) / (q * q);
}

double equicorr_pair_hessian(const PairStats& s, double rho) {
  check_rho(rho);
  const double n = static_cast<double>(s.n);
  const double a = (s.ss_jj + s.ss_kk) / n;
  const double b = s.ss_jk / n;
  const double q = 1.0 - rho * rho;
  const double q2 = q * q;
  const double q3 = q2 * q;
  return (1.0 + rho * rho) / q2 - a * (1.0 / q2 + 4.0 * rho * rho / q3) +
         b * (2.0 * rho / q2 + 4.0 * rho * (1.0 + rho * rho) / q3);
}

EquiCorrPairUnit::EquiCorrPairUnit(const Eigen::MatrixXd& data, Eigen::Index j, Eigen::Index k,
                                   std::string label)
    : x_(data.col(j)), y_(data.col(k)), stats_(pair_stats(data, j, k)), label_(std::move(label)) {
  if (j == k || j < 0 || k < 0 || j >= data.cols() || k >= data.cols()) {
    throw ValidationError("invalid column pair (" + std::to_string(j) + ", " + std::to_string(k) + ")");
  }
  if (label_.empty()) label_ = "pair_" + std::to_string(j + 1) + "_" + std::to_string(k + 1);
}

Eigen::VectorXd EquiCorrPairUnit::per_obs_loglik(const Eigen::VectorXd& theta) const {
  const double rho = theta_rho(theta);
  const double q = 1.0 - rho * rho;
  const Eigen::ArrayXd a = x_.array().square() + y_.array().square();
  const Eigen::ArrayXd b = x_.array() * y_.array();
  return (-0.5 * std::log(q) - a / (2.0 * q) + rho * b / q).matrix();
}

Eigen::MatrixXd EquiCorrPairUnit::per_obs_score(const Eigen::VectorXd& theta) const {
  const double rho = theta_rho(theta);
  const double q = 1.0 - rho * rho;
  const Eigen::ArrayXd a = x_.array().square() + y_.array().square();
  const Eigen::ArrayXd b = x_.array() * y_.array();
  return (rho / q - a * rho / (q * q) + b * (1.0 + rho * rho) / (q * q)).matrix();
}

double EquiCorrPairUnit::loglik_avg(const Eigen::VectorXd& theta) const {
  return equicorr_pair_loglik(stats_, theta_rho(theta));
}

Eigen::VectorXd EquiCorrPairUnit::score(const Eigen::VectorXd& theta) const {
  return Eigen::VectorXd::Constant(1, equicorr_pair_score(stats_, theta_rho(theta)));
}

Eigen::MatrixXd EquiCorrPairUnit::hessian(const Eigen::VectorXd& theta) const {
  return Eigen::MatrixXd::Constant(1, 1, equicorr_pair_hessian(stats_, theta_rho(theta)));
}

CompositeDesign make_equicorr_design(const Eigen::MatrixXd& data) {
  if (data.cols() < 3) {
    throw ValidationError("the equicorrelation design needs at least three columns (two pairs)");
  }
  std::vector<UnitPtr> units;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index k = j + 1; k < data.cols(); ++k) {
      units.push_back(std::make_shared<EquiCorrPairUnit>(data, j, k));
    }
  }
  return CompositeDesign(data, std::move(units));
}

Eigen::VectorXd equicorr_initial(const Eigen::MatrixXd& data) {
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  double total = 0.0;
  int count = 0;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    for (Eigen::Index k = j + 1; k < data.cols(); ++k) {
      const double denom = std::sqrt(cov(j, j) * cov(k, k));
      if (denom > 0.0) {
        total += cov(j, k) / denom;
        ++count;
      }
    }
  }
  const double rho = count > 0 ? total / count : 0.0;
  return Eigen::VectorXd::Constant(1, std::clamp(rho, -0.95, 0.95));
}

namespace {

struct FullStats {
  double mean_sq = 0.0;   // mean ||x||^2
  double mean_sum2 = 0.0;  // mean (sum_k x_k)^2
  double d = 0.0;
};

FullStats full_stats(const Eigen::MatrixXd& data) {
  FullStats s;
  s.d = static_cast<double>(data.cols());
  s.mean_sq = data.rowwise().squaredNorm().mean();
  s.mean_sum2 = data.rowwise().sum().array().square().mean();
  return s;
}

double full_loglik(const FullStats& s, double rho) {
  const double a = 1.0 - rho;
  const double b = 1.0 + (s.d - 1.0) * rho;
  return -0.5 * ((s.d - 1.0) * std::log(a) + std::log(b)) - 0.5 * s.mean_sq / a +
         0.5 * rho * s.mean_sum2 / (a * b);
}

double full_score(const FullStats& s, double rho) {
  const double a = 1.0 - rho;
  const double b = 1.0 + (s.d - 1.0) * rho;
  const double ab = a * b;
  const double d_ratio = (ab - rho * (-b + (s.d - 1.0) * a)) / (ab * ab);
  return 0.5 * (s.d - 1.0) / a - 0.5 * (s.d - 1.0) / b - 0.5 * s.mean_sq / (a * a) +
         0.5 * s.mean_sum2 * d_ratio;
}

}  // namespace

double equicorr_full_loglik(const Eigen::MatrixXd& data, double rho) {
  const double d = static_cast<double>(data.cols());
  if (!(rho > -1.0 / (d - 1.0) && rho < 1.0)) {
    throw DomainError("equicorrelation " + std::to_string(rho) + " is not positive definite");
  }
  return full_loglik(full_stats(data), rho);
}

ScalarMaxResult equicorr_mle(const Eigen::MatrixXd& data) {
  const FullStats s = full_stats(data);
  const double lo = -1.0 / (s.d - 1.0) + 1e-6;
  const double hi = 1.0 - 1e-6;
  ScalarMaxResult out;
  double rho = std::clamp(equicorr_initial(data)[0], lo, hi);
  double f = full_loglik(s, rho);
  for (int it = 0; it < 200; ++it) {
    const double g = full_score(s, rho);
    if (std::abs(g) <= 1e-10) {
      out.converged = true;
      break;
    }
    const double h = 1e-6 * (1.0 + std::abs(rho));
    const double curv = (full_score(s, std::min(rho + h, hi)) - full_score(s, std::max(rho - h, lo))) /
                        (std::min(rho + h, hi) - std::max(rho - h, lo));
    double step = curv < 0.0 ? -g / curv : (g > 0.0 ? 0.1 : -0.1);
    bool moved = false;
    for (int halving = 0; halving <= 30; ++halving, step *= 0.5) {
      const double trial = std::clamp(rho + step, lo, hi);
      const double ft = full_loglik(s, trial);
      if (ft >= f - 1e-14 * (1.0 + std::abs(f))) {
        moved = trial != rho;
        rho = trial;
        f = ft;
        break;
      }
    }
    if (!moved) {
      // pinned at a bound or no ascent available
      out.converged = rho == lo || rho == hi;
      break;
    }
  }
  out.argmax = rho;
  return out;
}

}  // namespace dmcle
