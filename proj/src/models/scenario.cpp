#include "dmcle/models/scenario.hpp"

#include <cmath>

#include "dmcle/errors.hpp"

namespace dmcle {

std::string to_string(ScenarioFamily family) {
  return family == ScenarioFamily::kEquicorr ? "equicorr" : "hetero-location";
}

ScenarioFamily parse_family(const std::string& name) {
  if (name == "equicorr") return ScenarioFamily::kEquicorr;
  if (name == "hetero-location") return ScenarioFamily::kHeteroLocation;
  throw ConfigError("unknown scenario family '" + name + "'");
}

namespace {

void check(const ScenarioConfig& c) {
  if (c.d < 2) throw ConfigError("scenario needs d >= 2");
  if (c.n < 1) throw ConfigError("scenario needs n >= 1");
  if (c.family == ScenarioFamily::kEquicorr) {
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(std::abs(c.rho0) < 1.0)) throw ConfigError("rho0 must lie in (-1, 1)");
  } else {
    if (c.m_star < 0 || c.m_star > c.d) throw ConfigError("m_star must lie in [0, d]");
    if (!c.variances.empty() && static_cast<int>(c.variances.size()) != c.d) {
      throw ConfigError("need one variance per coordinate");
    }
    for (double v : c.variances) {
      if (!(v > 0.0)) throw ConfigError("variances must be positive");
    }
  }
}

}  // namespace

Eigen::MatrixXd scenario_covariance(const ScenarioConfig& c) {
  check(c);
  if (c.family == ScenarioFamily::kEquicorr) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(c.d, c.d, c.rho0);
    const double r1 = c.rho0 / std::sqrt(c.epsilon);
    s.row(0).setConstant(r1);
    s.col(0).setConstant(r1);
    s.diagonal().setOnes();
    return s;
  }
  Eigen::VectorXd v(c.d);
  for (int j = 0; j < c.d; ++j) {
    v[j] = c.variances.empty() ? 1.0 / (j + 1) : c.variances[static_cast<std::size_t>(j)];
  }
  return v.asDiagonal();
}

Eigen::VectorXd scenario_mean(const ScenarioConfig& c) {
  check(c);
  if (c.family == ScenarioFamily::kEquicorr) return Eigen::VectorXd::Zero(c.d);
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(c.d, c.mu0);
  mu.head(c.m_star).array() += c.shift;
  return mu;
}

Eigen::MatrixXd sample_scenario(const ScenarioConfig& c, CounterRng& rng) {
  const Eigen::MatrixXd cov = scenario_covariance(c);
  const Eigen::VectorXd mu = scenario_mean(c);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("scenario covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const auto n = static_cast<Eigen::Index>(c.n);
  Eigen::MatrixXd e(n, c.d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < c.d; ++j) e(i, j) = rng.normal();
  }
  return (e * l.transpose()).rowwise() + mu.transpose();
}

Eigen::MatrixXd sample_scenario(const ScenarioConfig& c, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  return sample_scenario(c, rng);
}

}  // namespace dmcle
