#include <doctest.h>

#include <cmath>
#include <random>

#include "dmcle/errors.hpp"
#include "dmcle/estimator.hpp"
#include "dmcle/models/hetero_location.hpp"
#include "dmcle/models/scenario.hpp"
#include "test_util.hpp"

using namespace dmcle;

namespace {

Eigen::MatrixXd location_data(std::uint64_t seed, std::size_t n, int d, int m_star) {
  ScenarioConfig c;
  c.family = ScenarioFamily::kHeteroLocation;
  c.n = n;
  c.d = d;
  c.m_star = m_star;
  return sample_scenario(c, seed);
}

}  // namespace

TEST_CASE("unit score and hessian match finite differences") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z;
  for (int t = 0; t < 100; ++t) {
    const Eigen::MatrixXd x = location_data(100 + t, 20, 4, t % 3);
    const HeteroLocationUnit unit(x, t % 4, 4);
    Eigen::VectorXd th(5);
    for (int i = 0; i < 5; ++i) th[i] = 0.5 * z(gen);
    const Eigen::VectorXd g =
        testutil::fd_gradient([&](const Eigen::VectorXd& v) { return unit.loglik_avg(v); }, th);
    CHECK(testutil::rel_err(unit.score(th), g) < 1e-5);
    CHECK(unit.per_obs_loglik(th).mean() == doctest::Approx(unit.loglik_avg(th)).epsilon(1e-12));
    const Eigen::MatrixXd h = unit.hessian(th);
    for (int r = 0; r < 5; ++r) {
      const auto gr = testutil::fd_gradient(
          [&](const Eigen::VectorXd& v) { return unit.score(v)[r]; }, th);
      CHECK(testutil::rel_err(h.row(r).transpose(), gr) < 1e-5);
    }
  }
}

TEST_CASE("labels and domain") {
  const Eigen::MatrixXd x = location_data(1, 10, 3, 0);
  const CompositeDesign d = make_hetero_location_design(x);
  CHECK(d.labels() == std::vector<std::string>{"col_1", "col_2", "col_3"});
  CHECK(make_hetero_location_design(x, {"a", "b", "c"}).labels()[2] == "c");
  Eigen::VectorXd th = Eigen::VectorXd::Zero(4);
  th[1] = 800.0;
  CHECK_THROWS_AS(d.loglik_values(th), DomainError);
  CHECK_THROWS_AS(d.loglik_values(Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST_CASE("fixed point with equal column means returns that mean") {
  Eigen::MatrixXd x = location_data(2, 30, 6, 2);
  for (int j = 0; j < 6; ++j) x.col(j).array() += 1.75 - x.col(j).mean();
  for (double xi : {0.0, 0.1, 0.4, 1.0, 1.7}) {
    const LocationFit f = hetero_location_fixed_point(x, xi, 0.0);
    CHECK(f.converged);
    CHECK(f.mu == doctest::Approx(1.75).epsilon(1e-10));
    // generic fit agrees too
    const FitResult g = fit_dmcle(make_hetero_location_design(x), xi, hetero_location_initial(x));
    CHECK(g.converged);
    CHECK(g.theta_hat[0] == doctest::Approx(1.75).epsilon(1e-8));
  }
}

TEST_CASE("xi = 0 gives the unweighted mean of means") {
  const Eigen::MatrixXd x = location_data(3, 25, 10, 2);
  const LocationFit f = hetero_location_fixed_point(x, 0.0, 5.0);
  CHECK(f.mu == doctest::Approx(x.colwise().mean().mean()).epsilon(1e-12));
  CHECK((f.weights.array() - 0.1).abs().maxCoeff() < 1e-15);
  for (int j = 0; j < 10; ++j) {
    CHECK(f.sigma2[j] == doctest::Approx((x.col(j).array() - f.mu).square().mean()).epsilon(1e-12));
  }
}

TEST_CASE("precision-weighted fixed point agrees with the generic fit") {
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd x = location_data(50 + t, 40, 3 + t % 5, t % 3);
    const CompositeDesign d = make_hetero_location_design(x);
    for (double xi : {0.0, 0.2, 0.5}) {
      if (xi >= std::log(static_cast<double>(x.cols()))) continue;
      const LocationFit f =
          hetero_location_fixed_point(x, xi, x.mean(), LocationUpdate::kPrecisionWeighted);
      const FitResult g = fit_dmcle(d, xi, hetero_location_initial(x));
      REQUIRE(f.converged);
      REQUIRE(g.converged);
      CHECK(std::abs(f.mu - g.theta_hat[0]) < 1e-6);
      CHECK((f.sigma2.array().log() - g.theta_hat.tail(x.cols()).array()).abs().maxCoeff() < 1e-6);
      CHECK((f.weights - g.weights).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
}

TEST_CASE("tilting down-weights the shifted coordinates") {
  const Eigen::MatrixXd x = location_data(4, 100, 10, 2);
  const LocationFit f0 = hetero_location_fixed_point(x, 0.0, 0.0);
  const LocationFit f3 = hetero_location_fixed_point(x, 0.3, 0.0);
  CHECK(std::abs(f3.mu) < std::abs(f0.mu));
  CHECK(f3.weights[0] < f3.weights[9]);
  CHECK(f3.weights[1] < f3.weights[9]);
}

TEST_CASE("non-convergence is flagged, bad input raises") {
  const Eigen::MatrixXd x = location_data(5, 20, 5, 2);
  const LocationFit f = hetero_location_fixed_point(x, 0.5, 10.0, LocationUpdate::kPlain, 1e-10, 1);
  CHECK_FALSE(f.converged);
  CHECK(f.sweeps == 1);
  Eigen::MatrixXd c = x;
  c.col(2).setConstant(1.0);
  CHECK_THROWS_AS(hetero_location_fixed_point(c, 0.1, 0.0), DataError);
  CHECK_THROWS_AS(hetero_location_initial(c), DataError);
  CHECK_THROWS_AS(hetero_location_fixed_point(x, std::log(5.0), 0.0), InfeasibleDivergenceError);
}

TEST_CASE("inverse variance mean") {
  Eigen::MatrixXd x(3, 2);
  x << 0, 10, 1, 14, 2, 12;
  // means 1, 12; sample variances 1, 4
  CHECK(inverse_variance_mean(x) == doctest::Approx((1.0 * 1 + 12.0 / 4) / (1 + 0.25)).epsilon(1e-14));
}
