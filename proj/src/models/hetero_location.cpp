#include "dmcle/models/hetero_location.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "dmcle/errors.hpp"
#include "dmcle/tilt.hpp"

namespace dmcle {

HeteroLocationUnit::HeteroLocationUnit(const Eigen::MatrixXd& data, Eigen::Index column,
                                       Eigen::Index num_columns, std::string label)
    : x_(data.col(column)), column_(column), num_columns_(num_columns), label_(std::move(label)) {
  if (column < 0 || column >= num_columns) {
    throw ValidationError("column index " + std::to_string(column) + " out of range");
  }
  if (label_.empty()) label_ = "col_" + std::to_string(column + 1);
}

namespace {

struct LocScale {
  double mu;
  double log_var;
};

LocScale unpack(const Eigen::VectorXd& theta, Eigen::Index column, Eigen::Index num_columns) {
  if (theta.size() != num_columns + 1) {
    throw ValidationError("hetero-location parameter must have " + std::to_string(num_columns + 1) +
                          " entries");
  }
  const LocScale ls{theta[0], theta[1 + column]};
  if (!std::isfinite(ls.mu) || !std::isfinite(ls.log_var) || std::abs(ls.log_var) > 700.0) {
    throw DomainError("hetero-location parameter out of range");
  }
  return ls;
}

}  // namespace

Eigen::VectorXd HeteroLocationUnit::per_obs_loglik(const Eigen::VectorXd& theta) const {
  const auto [mu, tau] = unpack(theta, column_, num_columns_);
  const double prec = std::exp(-tau);
  return (-0.5 * (tau + (x_.array() - mu).square() * prec)).matrix();
}

Eigen::MatrixXd HeteroLocationUnit::per_obs_score(const Eigen::VectorXd& theta) const {
  const auto [mu, tau] = unpack(theta, column_, num_columns_);
  const double prec = std::exp(-tau);
  const Eigen::ArrayXd r = x_.array() - mu;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x_.size(), num_columns_ + 1);
  s.col(0) = (r * prec).matrix();
  s.col(1 + column_) = (-0.5 + 0.5 * r.square() * prec).matrix();
  return s;
}

double HeteroLocationUnit::loglik_avg(const Eigen::VectorXd& theta) const {
  const auto [mu, tau] = unpack(theta, column_, num_columns_);
  return -0.5 * (tau + (x_.array() - mu).square().mean() * std::exp(-tau));
}

Eigen::MatrixXd HeteroLocationUnit::hessian(const Eigen::VectorXd& theta) const {
  const auto [mu, tau] = unpack(theta, column_, num_columns_);
  const double prec = std::exp(-tau);
  const Eigen::ArrayXd r = x_.array() - mu;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(num_columns_ + 1, num_columns_ + 1);
  h(0, 0) = -prec;
  h(0, 1 + column_) = h(1 + column_, 0) = -r.mean() * prec;
  h(1 + column_, 1 + column_) = -0.5 * r.square().mean() * prec;
  return h;
}

CompositeDesign make_hetero_location_design(const Eigen::MatrixXd& data,
                                            const std::vector<std::string>& labels) {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != data.cols()) {
    throw ValidationError("one label per column is required");
  }
  std::vector<UnitPtr> units;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    units.push_back(std::make_shared<HeteroLocationUnit>(
        data, j, data.cols(), labels.empty() ? std::string{} : labels[static_cast<std::size_t>(j)]));
  }
  return CompositeDesign(data, std::move(units));
}

Eigen::VectorXd hetero_location_initial(const Eigen::MatrixXd& data) {
  const double mu = data.mean();
  Eigen::VectorXd theta(data.cols() + 1);
  theta[0] = mu;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double s2 = (data.col(j).array() - mu).square().mean();
    const double own = (data.col(j).array() - data.col(j).mean()).square().mean();
    if (!(own > 0.0) || !(s2 > 0.0)) throw DataError("column " + std::to_string(j + 1) + " is constant");
    theta[1 + j] = std::log(s2);
  }
  return theta;
}

LocationFit hetero_location_fixed_point(const Eigen::MatrixXd& data, double xi, double mu0,
                                        LocationUpdate update, double tol, int max_sweeps) {
  const Eigen::Index m = data.cols();
  if (m < 2 || data.rows() < 2) throw ValidationError("need at least two columns and two rows");
  const Eigen::VectorXd xbar = data.colwise().mean().transpose();
  // s_j^2(mu) = v_j + (xbar_j - mu)^2
  const Eigen::VectorXd v =
      (data.rowwise() - xbar.transpose()).colwise().squaredNorm().transpose() /
      static_cast<double>(data.rows());
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!(v[j] > 0.0)) throw DataError("column " + std::to_string(j + 1) + " is constant");
  }

  LocationFit out;
  auto sigma2_at = [&](double mu) {
    return (v.array() + (xbar.array() - mu).square()).matrix().eval();
  };
  double mu = mu0;
  for (out.sweeps = 1; out.sweeps <= max_sweeps; ++out.sweeps) {
    const Eigen::VectorXd s2 = sigma2_at(mu);
    const Eigen::VectorXd ell = (-0.5 * (s2.array().log() + 1.0)).matrix();
    const TiltSolution tilt = solve_alpha1(ell, xi);
    double next = 0.0;
    if (update == LocationUpdate::kPlain) {
      next = tilt.weights.dot(xbar);
    } else {
      const Eigen::VectorXd a = tilt.weights.cwiseQuotient(s2);
      next = a.dot(xbar) / a.sum();
    }
    const bool done = std::abs(next - mu) <= tol * (1.0 + std::abs(mu));
    mu = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.sweeps = std::min(out.sweeps, max_sweeps);
  out.mu = mu;
  out.sigma2 = sigma2_at(mu);
  const Eigen::VectorXd ell = (-0.5 * (out.sigma2.array().log() + 1.0)).matrix();
  const TiltSolution tilt = solve_alpha1(ell, xi);
  out.weights = tilt.weights;
  out.alpha1 = tilt.alpha1;
  return out;
}

double inverse_variance_mean(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw ValidationError("need at least two rows");
  const Eigen::RowVectorXd xbar = data.colwise().mean();
  const Eigen::RowVectorXd s2 =
      (data.rowwise() - xbar).colwise().squaredNorm() / static_cast<double>(data.rows() - 1);
  const Eigen::RowVectorXd a = s2.cwiseInverse();
  return a.dot(xbar) / a.sum();
}

}  // namespace dmcle
