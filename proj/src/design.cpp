#include "dmcle/design.hpp"

#include <string>

#include "dmcle/errors.hpp"

namespace dmcle {

double SubLikelihood::loglik_avg(const Eigen::VectorXd& theta) const {
  return per_obs_loglik(theta).mean();
}

Eigen::VectorXd SubLikelihood::score(const Eigen::VectorXd& theta) const {
  return per_obs_score(theta).colwise().mean().transpose();
}

Eigen::MatrixXd SubLikelihood::hessian(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd h = central_jacobian([this](const Eigen::VectorXd& t) { return score(t); }, theta);
  return 0.5 * (h + h.transpose());
}

CompositeDesign::CompositeDesign(Eigen::MatrixXd data, std::vector<UnitPtr> units)
    : data_(std::make_shared<const Eigen::MatrixXd>(std::move(data))), units_(std::move(units)) {
  if (units_.size() < 2) {
    throw ValidationError("a composite design needs at least two sub-likelihoods, got " +
                          std::to_string(units_.size()));
  }
  if (data_->rows() < 2) throw ValidationError("a composite design needs at least two observations");
  param_dim_ = units_.front()->param_dim();
  for (std::size_t j = 0; j < units_.size(); ++j) {
    if (!units_[j]) throw ValidationError("null sub-likelihood unit");
    if (units_[j]->param_dim() != param_dim_) {
      throw ValidationError("unit " + units_[j]->label() + " has parameter dimension " +
                            std::to_string(units_[j]->param_dim()) + ", expected " +
                            std::to_string(param_dim_));
    }
    if (units_[j]->num_obs() != num_obs()) {
      throw ValidationError("unit " + units_[j]->label() + " has " +
                            std::to_string(units_[j]->num_obs()) + " observations, design has " +
                            std::to_string(num_obs()));
    }
  }
}

std::vector<std::string> CompositeDesign::labels() const {
  std::vector<std::string> out;
  out.reserve(units_.size());
  for (const auto& u : units_) out.push_back(u->label());
  return out;
}

Eigen::VectorXd CompositeDesign::loglik_values(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd ell(static_cast<Eigen::Index>(units_.size()));
  for (std::size_t j = 0; j < units_.size(); ++j) {
    ell[static_cast<Eigen::Index>(j)] = units_[j]->loglik_avg(theta);
  }
  return ell;
}

Eigen::MatrixXd CompositeDesign::scores(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd u(static_cast<Eigen::Index>(param_dim_), static_cast<Eigen::Index>(units_.size()));
  for (std::size_t j = 0; j < units_.size(); ++j) {
    u.col(static_cast<Eigen::Index>(j)) = units_[j]->score(theta);
  }
  return u;
}

}  // namespace dmcle
