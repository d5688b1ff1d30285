#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmcle/sublikelihood.hpp"

namespace dmcle {

using UnitPtr = std::shared_ptr<const SubLikelihood>;

// Ordered collection of m sub-likelihood units sharing one parameter space,
// built over an n x d observation matrix. Immutable and shareable across
// threads.
class CompositeDesign {
 public:
  CompositeDesign(Eigen::MatrixXd data, std::vector<UnitPtr> units);

  std::size_t num_units() const { return units_.size(); }
  std::size_t param_dim() const { return param_dim_; }
  std::size_t num_obs() const { return static_cast<std::size_t>(data_->rows()); }
  const Eigen::MatrixXd& data() const { return *data_; }
  const SubLikelihood& unit(std::size_t j) const { return *units_.at(j); }
  std::vector<std::string> labels() const;

  // ell_j(theta), j = 1..m
  Eigen::VectorXd loglik_values(const Eigen::VectorXd& theta) const;
  // p x m, column j is u_nj(theta)
  Eigen::MatrixXd scores(const Eigen::VectorXd& theta) const;

 private:
  std::shared_ptr<const Eigen::MatrixXd> data_;
  std::vector<UnitPtr> units_;
  std::size_t param_dim_ = 0;
};

}  // namespace dmcle
