#include <doctest.h>

#include <cmath>

#include "dmcle/errors.hpp"
#include "dmcle/models/scenario.hpp"

using namespace dmcle;

TEST_CASE("equicorrelation scenario covariance") {
  ScenarioConfig c;
  c.rho0 = 0.5;
  c.d = 5;
  c.epsilon = 1.0;
  const Eigen::MatrixXd s = scenario_covariance(c);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) CHECK(s(i, j) == (i == j ? 1.0 : 0.5));
  }
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff() > 0.0);
  c.epsilon = 5.0;
  const Eigen::MatrixXd s5 = scenario_covariance(c);
  CHECK(s5(0, 3) == doctest::Approx(0.5 / std::sqrt(5.0)));
  CHECK(s5(3, 0) == s5(0, 3));
  CHECK(s5(2, 3) == 0.5);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s5).eigenvalues().minCoeff() > 0.0);
  CHECK(scenario_mean(c).isZero());
}

TEST_CASE("location scenario") {
  ScenarioConfig c;
  c.family = ScenarioFamily::kHeteroLocation;
  c.d = 10;
  c.m_star = 2;
  c.shift = 1.0;
  const Eigen::MatrixXd s = scenario_covariance(c);
  for (int j = 0; j < 10; ++j) CHECK(s(j, j) == doctest::Approx(1.0 / (j + 1)));
  CHECK((s - Eigen::MatrixXd(s.diagonal().asDiagonal())).isZero());
  const Eigen::VectorXd mu = scenario_mean(c);
  CHECK(mu[0] == 1.0);
  CHECK(mu[1] == 1.0);
  for (int j = 2; j < 10; ++j) CHECK(mu[j] == 0.0);
}

TEST_CASE("sample moments match the scenario") {
  for (auto family : {ScenarioFamily::kEquicorr, ScenarioFamily::kHeteroLocation}) {
    ScenarioConfig c;
    c.family = family;
    c.d = family == ScenarioFamily::kEquicorr ? 5 : 10;
    c.epsilon = 3.0;
    c.m_star = 2;
    c.n = 100000;
    const Eigen::MatrixXd x = sample_scenario(c, 12345);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centred = x.rowwise() - mean;
    const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(c.n - 1);
    CHECK((cov - scenario_covariance(c)).lpNorm<Eigen::Infinity>() < 0.02);
    CHECK((mean.transpose() - scenario_mean(c)).lpNorm<Eigen::Infinity>() < 0.02);
  }
}

TEST_CASE("determinism and errors") {
  ScenarioConfig c;
  CHECK(sample_scenario(c, 9, 4) == sample_scenario(c, 9, 4));
  CHECK(sample_scenario(c, 9, 4) != sample_scenario(c, 9, 5));
  ScenarioConfig bad;
  bad.rho0 = -0.5;  // below -1/(d-1)
  CHECK_THROWS_AS(sample_scenario(bad, 1), ConfigError);
  bad.rho0 = 0.9;
  bad.epsilon = 0.1;  // off-row correlation above one
  CHECK_THROWS_AS(sample_scenario(bad, 1), ConfigError);
  ScenarioConfig loc;
  loc.family = ScenarioFamily::kHeteroLocation;
  loc.m_star = 11;
  loc.d = 10;
  CHECK_THROWS_AS(scenario_mean(loc), ConfigError);
  CHECK_THROWS_AS(parse_family("gaussian"), ConfigError);
  CHECK(parse_family("hetero-location") == ScenarioFamily::kHeteroLocation);
}
