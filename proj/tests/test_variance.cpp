#include <doctest.h>

#include <cmath>
#include <random>

#include "dmcle/errors.hpp"
#include "dmcle/estimator.hpp"
#include "dmcle/models/equicorr.hpp"
#include "dmcle/models/hetero_location.hpp"
#include "dmcle/models/scenario.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dmcle;

namespace {

CompositeDesign duplicated(const Eigen::VectorXd& x, double sigma, double shift = 0.0,
                           bool dead = false) {
  return CompositeDesign(x, {std::make_shared<oracle::NormalUnit>(x, sigma, "a", shift, dead),
                             std::make_shared<oracle::NormalUnit>(x, sigma, "b", shift, dead)});
}

Eigen::MatrixXd location_data(std::uint64_t seed, std::size_t n, int m_star) {
  ScenarioConfig c;
  c.family = ScenarioFamily::kHeteroLocation;
  c.n = n;
  c.d = 10;
  c.m_star = m_star;
  return sample_scenario(c, seed);
}

Eigen::MatrixXd equicorr_data(std::uint64_t seed, std::size_t n, double eps) {
  ScenarioConfig c;
  c.n = n;
  c.epsilon = eps;
  return sample_scenario(c, seed);
}

}  // namespace

TEST_CASE("normal mean with known variance: se is sigma / sqrt(n)") {
  std::mt19937_64 gen(1);
  const int n = 4000;
  const double sigma = 2.0;
  Eigen::VectorXd x = testutil::std_normal_matrix(gen, n, 1).col(0) * sigma + Eigen::VectorXd::Constant(n, 1.0);
  const CompositeDesign d = duplicated(x, sigma);
  FitResult f = fit_dmcle(d, 0.0, Eigen::VectorXd::Zero(1));
  REQUIRE(f.converged);
  CHECK(f.theta_hat[0] == doctest::Approx(x.mean()).epsilon(1e-10));
  const SandwichResult s = sandwich_variance(d, f);
  CHECK(s.H(0, 0) == doctest::Approx(-1.0 / (sigma * sigma)));
  // K is the empirical variance of the score: S^2 / sigma^4
  const double s2 = (x.array() - x.mean()).square().mean();
  CHECK(s.K(0, 0) == doctest::Approx(s2 / std::pow(sigma, 4)).epsilon(1e-10));
  CHECK(s.se[0] == doctest::Approx(sigma / std::sqrt(n)).epsilon(0.05));
}

TEST_CASE("H at xi = 0 is the weighted Hessian sum; at xi > 0 it adds the tilt term") {
  const Eigen::MatrixXd x = location_data(3, 60, 2);
  const CompositeDesign d = make_hetero_location_design(x);
  const FitResult f0 = fit_dmcle(d, 0.0, hetero_location_initial(x));
  REQUIRE(f0.converged);
  const SandwichResult s0 = sandwich_variance(d, f0);
  CHECK((s0.H - weighted_hessian(d, f0.theta_hat, f0.weights)).norm() < 1e-12 * s0.H.norm());

  const FitResult f = fit_dmcle(d, 0.4, f0.theta_hat);
  REQUIRE(f.converged);
  REQUIRE(f.alpha1 > 0.0);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(11, 11);
  for (std::size_t j = 0; j < d.num_units(); ++j) {
    const SubLikelihood& u = d.unit(j);
    // score by differencing the unit loglik
    const Eigen::VectorXd uj = testutil::fd_gradient(
        [&](const Eigen::VectorXd& t) { return u.loglik_avg(t); }, f.theta_hat, 1e-6);
    ref += f.weights[static_cast<Eigen::Index>(j)] * (u.hessian(f.theta_hat) + f.alpha1 * uj * uj.transpose());
  }
  const SandwichResult s = sandwich_variance(d, f);
  CHECK((s.H - ref).norm() < 1e-6 * ref.norm());
  const Eigen::MatrixXd hinv = s.H.inverse();
  CHECK((s.covariance - hinv * s.K * hinv / 60.0).norm() < 1e-10 * s.covariance.norm());
  CHECK((s.se.array().square() - s.covariance.diagonal().array()).abs().maxCoeff() < 1e-15);
}

TEST_CASE("plug-in and jackknife K agree") {
  double rel_sum = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const Eigen::MatrixXd x = location_data(100 + r, 100, 2);
    const CompositeDesign d = make_hetero_location_design(x);
    const FitResult f = fit_dmcle(d, 0.3, hetero_location_initial(x));
    REQUIRE(f.converged);
    const SandwichResult p = sandwich_variance(d, f, VarianceMethod::kPlugin);
    const SandwichResult j = sandwich_variance(d, f, VarianceMethod::kJackknife);
    CHECK((p.H - j.H).norm() == 0.0);
    rel_sum += (p.K - j.K).norm() / p.K.norm();
  }
  CHECK(rel_sum / reps < 0.25);
}

TEST_CASE("jackknife K at xi = 0 matches the n/(n-1) scaled plug-in") {
  // with fixed uniform weights the leave-one-out means are linear in the scores
  const Eigen::MatrixXd x = location_data(7, 40, 0);
  const CompositeDesign d = make_hetero_location_design(x);
  const FitResult f = fit_dmcle(d, 0.0, hetero_location_initial(x));
  const SandwichResult p = sandwich_variance(d, f, VarianceMethod::kPlugin);
  const SandwichResult j = sandwich_variance(d, f, VarianceMethod::kJackknife);
  CHECK((j.K - p.K * 40.0 / 39.0).norm() < 1e-10 * p.K.norm());
}

TEST_CASE("CLIC") {
  std::mt19937_64 gen(2);
  const int n = 300;
  Eigen::VectorXd x = testutil::std_normal_matrix(gen, n, 1).col(0);
  const double c = 0.37;
  const CompositeDesign a = duplicated(x, 0.0);
  const CompositeDesign b = duplicated(x, 0.0, c);
  FitResult fa = fit_dmcle(a, 0.0, Eigen::VectorXd::Zero(2));
  FitResult fb = fit_dmcle(b, 0.0, Eigen::VectorXd::Zero(2));
  attach_inference(a, fa);
  attach_inference(b, fb);
  REQUIRE(fa.clic);
  REQUIRE(fb.clic);
  CHECK(*fb.clic - *fa.clic == doctest::Approx(-2.0 * n * c).epsilon(1e-9));
  CHECK(clic(a, fa) == *fa.clic);

  // independent value: -2 n ell + tr((-H)^-1 K)
  const double mu = x.mean(), s2 = (x.array() - mu).square().mean();
  const double ell = -0.5 * std::log(s2) - 0.5;
  const Eigen::Vector2d ths(mu, std::log(s2));
  CHECK((fa.theta_hat - ths).norm() < 1e-8);
  CHECK(*fa.clic == doctest::Approx(-2.0 * n * ell + (-fa.H).inverse().cwiseProduct(fa.K.transpose()).sum()).epsilon(1e-10));

  // correctly specified, large n: penalty near p = 2
  Eigen::VectorXd big = testutil::std_normal_matrix(gen, 200000, 1).col(0);
  const CompositeDesign g = duplicated(big, 0.0);
  FitResult fg = fit_dmcle(g, 0.0, Eigen::VectorXd::Zero(2));
  attach_inference(g, fg);
  const double penalty = *fg.clic + 2.0 * 200000 * fg.composite_loglik;
  CHECK(penalty == doctest::Approx(2.0).epsilon(0.05));

  FitResult bare = fit_dmcle(a, 0.0, Eigen::VectorXd::Zero(2));
  CHECK_THROWS_AS(clic(a, bare), ValidationError);
}

TEST_CASE("singular H raises rank deficiency") {
  std::mt19937_64 gen(3);
  Eigen::VectorXd x = testutil::std_normal_matrix(gen, 50, 1).col(0);
  const CompositeDesign d = duplicated(x, 1.0, 0.0, true);
  FitResult f = fit_dmcle(d, 0.0, Eigen::VectorXd::Zero(2));
  REQUIRE(f.converged);
  CHECK_THROWS_AS(sandwich_variance(d, f), RankDeficiencyError);
  try {
    attach_inference(d, f);
  } catch (const RankDeficiencyError& e) {
    CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
  }
  FitResult bad = f;
  bad.converged = false;
  CHECK_THROWS_AS(sandwich_variance(d, bad), ValidationError);
}

TEST_CASE("CLIC prefers xi = 0.3 on incompatible equicorrelation data") {
  int wins = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const Eigen::MatrixXd x = equicorr_data(3000 + r, 50, 5.0);
    const CompositeDesign d = make_equicorr_design(x);
    FitResult f0 = fit_dmcle(d, 0.0, equicorr_initial(x));
    FitResult f3 = fit_dmcle(d, 0.3, f0.theta_hat);
    REQUIRE(f0.converged);
    REQUIRE(f3.converged);
    attach_inference(d, f0);
    attach_inference(d, f3);
    if (*f3.clic < *f0.clic) ++wins;
  }
  CHECK(wins > reps / 2);
}
