#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "dmcle/errors.hpp"
#include "dmcle/rng.hpp"
#include "dmcle/simharness.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dmcle;

namespace {

Table1Config small_table1() {
  Table1Config c;
  c.epsilons = {1.0, 5.0};
  c.xi_grid = {0.0, 0.2, 0.5};
  c.replications = 150;
  c.seed = 77;
  c.threads = 2;
  return c;
}

Table2Config small_table2() {
  Table2Config c;
  c.ns = {10, 100};
  c.m_stars = {0, 2};
  c.xi_grid = {0.0, 0.3};
  c.replications = 300;
  c.seed = 78;
  c.threads = 2;
  return c;
}

bool same_cells(const MonteCarloTable& a, const MonteCarloTable& b) {
  if (a.cells.size() != b.cells.size()) return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& x = a.cells[i];
    const auto& y = b.cells[i];
    if (x.params != y.params || x.estimator != y.estimator || x.xi != y.xi ||
        x.bias2_scaled != y.bias2_scaled || x.var_scaled != y.var_scaled ||
        x.mcse_bias2 != y.mcse_bias2 || x.mcse_var != y.mcse_var || x.used != y.used ||
        x.failures != y.failures) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("summarize against direct formulas") {
  std::mt19937_64 gen(1);
  std::gamma_distribution<double> g(2.0, 1.5);
  std::vector<double> x(500);
  for (double& v : x) v = g(gen);
  const MomentSummary s = summarize(x, 2.0);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= 500.0;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= 499.0;
  CHECK(s.mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(s.bias2 == doctest::Approx((mean - 2.0) * (mean - 2.0)).epsilon(1e-12));
  CHECK(s.var == doctest::Approx(var).epsilon(1e-12));
  // delta-method standard error of the squared mean bias
  const double se = std::sqrt(var / 500.0);
  CHECK(s.mcse_bias2 == doctest::Approx(std::sqrt(4 * (mean - 2) * (mean - 2) * se * se + 2 * std::pow(se, 4))));
  // standard error of the variance: close to sqrt((mu4 - var^2) / R)
  double mu4 = 0.0;
  for (double v : x) mu4 += std::pow(v - mean, 4);
  mu4 /= 500.0;
  CHECK(s.mcse_var == doctest::Approx(std::sqrt((mu4 - var * var) / 500.0)).epsilon(0.01));
  const MomentSummary one = summarize({1.0}, 0.0);
  CHECK(std::isnan(one.var));
}

TEST_CASE("table 1 cells, determinism and thread independence") {
  Table1Config c = small_table1();
  const MonteCarloTable a = run_table1(c);
  CHECK(a.scale == 100.0);
  CHECK(a.param_names == std::vector<std::string>{"eps", "rho0", "d", "n"});
  CHECK(a.cells.size() == 2 * 4);
  for (const auto& cell : a.cells) {
    CHECK(cell.used + cell.failures == c.replications);
    CHECK(cell.bias2_scaled >= 0.0);
    CHECK(cell.var_scaled >= 0.0);
    CHECK(cell.mcse_bias2 > 0.0);
    CHECK(cell.mcse_var > 0.0);
    CHECK(cell.truth == 0.5);
  }
  c.threads = 1;
  CHECK(same_cells(a, run_table1(c)));
  c.threads = 4;
  CHECK(same_cells(a, run_table1(c)));

  // incompatibility shows up at xi = 0 and shrinks with tilting
  const auto* b0 = a.find({5.0, 0.5, 5.0, 50.0}, "dmcle", 0.0);
  const auto* b5 = a.find({5.0, 0.5, 5.0, 50.0}, "dmcle", 0.5);
  REQUIRE(b0);
  REQUIRE(b5);
  CHECK(b5->bias2_scaled < b0->bias2_scaled);
  CHECK(a.find({5.0, 0.5, 5.0, 50.0}, "mle") != nullptr);
  CHECK(a.find({2.0, 0.5, 5.0, 50.0}, "mle") == nullptr);

  // xi = 0 limit of the pairwise estimate is near the mean pair correlation
  const double mean_corr = (4 * 0.5 / std::sqrt(5.0) + 6 * 0.5) / 10.0;
  CHECK(std::abs(b0->mean - mean_corr) < 0.03);
}

TEST_CASE("table 2 cells") {
  const Table2Config c = small_table2();
  const MonteCarloTable t = run_table2(c);
  CHECK(t.scale == 1000.0);
  CHECK(t.cells.size() == 4 * 3);
  // xi = 0 is the mean of means: bias 2 / 10 exactly in expectation
  const auto* c0 = t.find({100.0, 2.0, 10.0, 1.0}, "dmcle", 0.0);
  REQUIRE(c0);
  CHECK(std::abs(c0->mean - 0.2) < 4.0 * std::sqrt(c0->var_scaled / 1000.0 / c0->used));
  const auto* c3 = t.find({100.0, 2.0, 10.0, 1.0}, "dmcle", 0.3);
  REQUIRE(c3);
  CHECK(c3->bias2_scaled < 0.5);
  for (double xi : {0.0, 0.3}) {
    const auto* z = t.find({100.0, 0.0, 10.0, 1.0}, "dmcle", xi);
    REQUIRE(z);
    CHECK(z->bias2_scaled < 3.0 * z->mcse_bias2 + 0.05);
  }
  // MLE: inverse-variance weighted mean, unbiased without shift
  const auto* mle = t.find({100.0, 0.0, 10.0, 1.0}, "mle");
  REQUIRE(mle);
  CHECK(mle->var_scaled < c0->var_scaled);
}

TEST_CASE("splitting replications across seeds and pooling") {
  Table2Config c = small_table2();
  c.ns = {100};
  c.m_stars = {2};
  c.include_mle = false;
  c.replications = 600;
  const MonteCarloTable whole = run_table2(c);
  c.replications = 300;
  c.seed = 1001;
  const MonteCarloTable h1 = run_table2(c);
  c.seed = 1002;
  const MonteCarloTable h2 = run_table2(c);
  for (std::size_t i = 0; i < whole.cells.size(); ++i) {
    const double pooled_mean = 0.5 * (h1.cells[i].mean + h2.cells[i].mean);
    const double truth = whole.cells[i].truth;
    const double pooled_bias2 = 1000.0 * (pooled_mean - truth) * (pooled_mean - truth);
    // standard error of the difference of two independent estimates
    const double mcse = std::hypot(whole.cells[i].mcse_bias2, 0.5 * std::hypot(h1.cells[i].mcse_bias2, h2.cells[i].mcse_bias2));
    CHECK(std::abs(pooled_bias2 - whole.cells[i].bias2_scaled) < 2.0 * mcse + 1e-6);
  }
}

TEST_CASE("configuration errors") {
  Table1Config c = small_table1();
  c.xi_grid = {0.0, 2.5};
  CHECK_THROWS_AS(run_table1(c), ConfigError);
  c = small_table1();
  c.replications = 0;
  CHECK_THROWS_AS(run_table1(c), ConfigError);
  c = small_table1();
  c.rho0 = 0.95;
  c.epsilons = {0.5};
  CHECK_THROWS_AS(run_table1(c), ConfigError);
  Table2Config t = small_table2();
  t.m_stars = {12};
  CHECK_THROWS_AS(run_table2(t), ConfigError);
  t = small_table2();
  t.xi_grid = {-0.1};
  CHECK_THROWS_AS(run_table2(t), ConfigError);
}

TEST_CASE("max-bias curves") {
  std::vector<double> grid;
  for (int i = -40; i <= 40; ++i) grid.push_back(0.1 * i);
  const auto rows = run_maxbias_curves(10, {0, 1, 2, 3, 4}, {0.0, 1.0, 2.0}, 1.0, grid);
  CHECK(rows.size() == 5 * 3 * grid.size());
  for (const auto& r : rows) {
    if (r.m_star == 0) CHECK(r.bound == 0.0);
    if (r.alpha1 == 0.0) CHECK(r.bound == doctest::Approx(std::abs(r.delta) * r.m_star / 10.0));
    CHECK(r.bound >= 0.0);
  }
  const CsvTable t = to_csv_table(rows);
  CHECK(t.header == std::vector<std::string>{"m", "m_star", "alpha1", "delta", "max_bias"});
  CHECK(t.rows.size() == rows.size());
}

TEST_CASE("csv layout and metadata") {
  Table2Config c = small_table2();
  c.replications = 20;
  const MonteCarloTable t = run_table2(c);
  const CsvTable csv = to_csv_table(t);
  const std::vector<std::string> head{"n", "m_star", "d", "shift", "estimator", "xi",
                                      "bias2_scaled", "var_scaled", "mcse_bias2", "mcse_var",
                                      "failures", "used"};
  CHECK(csv.header == head);
  CHECK(csv.rows.size() == t.cells.size());
  for (const auto& row : csv.rows) {
    if (row[4] == "mle") {
      CHECK(row[5].empty());
    } else {
      CHECK_FALSE(row[5].empty());
    }
  }
  // round trip through text is lossless
  const CsvTable back = parse_csv(to_csv(csv));
  CHECK(back.rows == csv.rows);
  CHECK(parse_double(csv.rows[0][6]) == t.cells[0].bias2_scaled);

  const auto meta = run_metadata(to_json(c), c.seed, 1.5, 3);
  CHECK(meta.at("seed") == c.seed);
  CHECK(meta.at("rng") == std::string(CounterRng::kAlgorithm));
  CHECK(meta.at("config").at("replications") == 20);
  CHECK(meta.at("threads") == 3);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  ::setenv("DMCLE_THREADS", "1", 1);
  CHECK(resolve_threads(0) == 1);
  ::setenv("DMCLE_THREADS", "zero", 1);
  CHECK_THROWS_AS(resolve_threads(0), ConfigError);
  ::setenv("DMCLE_THREADS", "0", 1);
  CHECK_THROWS_AS(resolve_threads(0), ConfigError);
  ::unsetenv("DMCLE_THREADS");
  CHECK(resolve_threads(0) >= 1);
}
