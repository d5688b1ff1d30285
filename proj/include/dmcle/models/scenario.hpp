#pragma once

// Data-generating processes for the two simulation families.
//
// equicorr: d unit-variance normals, correlation rho0 between every pair
// except (1, k), which have rho0 / sqrt(epsilon).
// hetero-location: d independent normals with variances sigma2 (default
// 1/j), mean mu0 shifted by `shift` on the first m_star coordinates.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dmcle/rng.hpp"

namespace dmcle {

enum class ScenarioFamily { kEquicorr, kHeteroLocation };

std::string to_string(ScenarioFamily family);
// Accepts "equicorr" and "hetero-location"; ConfigError otherwise.
ScenarioFamily parse_family(const std::string& name);

struct ScenarioConfig {
  ScenarioFamily family = ScenarioFamily::kEquicorr;
  int d = 5;
  std::size_t n = 50;
  // equicorr
  double rho0 = 0.5;
  double epsilon = 1.0;
  // hetero-location
  double mu0 = 0.0;
  std::vector<double> variances;  // empty: 1, 1/2, ..., 1/d
  int m_star = 0;
  double shift = 1.0;
};

Eigen::MatrixXd scenario_covariance(const ScenarioConfig& config);
Eigen::VectorXd scenario_mean(const ScenarioConfig& config);

// n rows drawn as mean + L e, L the Cholesky factor of the scenario
// covariance. ConfigError when the covariance is not positive definite.
Eigen::MatrixXd sample_scenario(const ScenarioConfig& config, CounterRng& rng);
Eigen::MatrixXd sample_scenario(const ScenarioConfig& config, std::uint64_t seed,
                                std::uint64_t stream = 0);

}  // namespace dmcle
