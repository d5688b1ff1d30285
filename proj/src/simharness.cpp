#include "dmcle/simharness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "dmcle/errors.hpp"
#include "dmcle/models/equicorr.hpp"
#include "dmcle/models/hetero_location.hpp"
#include "dmcle/models/scenario.hpp"
#include "dmcle/rng.hpp"

namespace dmcle {

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DMCLE_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw ConfigError(std::string("DMCLE_THREADS must be a positive integer, got '") + env + "'");
    }
    hw = std::min(hw, static_cast<std::size_t>(cap));
  }
  return hw;
}

namespace {

// Runs fn(i) for i in [0, count); each index is written by exactly one thread.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct Replication {
  bool ok = false;
  double mle = 0.0;
  std::vector<double> estimates;
};

void check_grid(const std::vector<double>& grid, std::size_t m) {
  if (grid.empty()) throw ConfigError("xi grid is empty");
  for (double xi : grid) {
    if (!(xi >= 0.0) || !(xi < std::log(static_cast<double>(m)))) {
      throw ConfigError("xi grid values must lie in [0, log m) = [0, " +
                        std::to_string(std::log(static_cast<double>(m))) + ")");
    }
  }
}

std::uint64_t stream_id(std::size_t scenario, std::size_t rep) {
  return (static_cast<std::uint64_t>(scenario) << 32) | static_cast<std::uint64_t>(rep);
}

void append_cells(MonteCarloTable& table, const std::vector<double>& params,
                  const std::vector<Replication>& reps, const std::vector<double>& grid,
                  double truth, bool include_mle) {
  std::vector<const Replication*> kept;
  for (const auto& r : reps) {
    if (r.ok) kept.push_back(&r);
  }
  const std::size_t failures = reps.size() - kept.size();
  auto add = [&](const std::string& estimator, std::optional<double> xi, auto getter) {
    std::vector<double> values;
    values.reserve(kept.size());
    for (const auto* r : kept) values.push_back(getter(*r));
    const MomentSummary s = summarize(values, truth);
    MonteCarloCell c;
    c.params = params;
    c.estimator = estimator;
    c.xi = xi;
    c.truth = truth;
    c.mean = s.mean;
    c.bias2_scaled = s.bias2 * table.scale;
    c.var_scaled = s.var * table.scale;
    c.mcse_bias2 = s.mcse_bias2 * table.scale;
    c.mcse_var = s.mcse_var * table.scale;
    c.used = kept.size();
    c.failures = failures;
    table.cells.push_back(std::move(c));
  };
  if (include_mle) add("mle", std::nullopt, [](const Replication& r) { return r.mle; });
  for (std::size_t g = 0; g < grid.size(); ++g) {
    add("dmcle", grid[g], [g](const Replication& r) { return r.estimates[g]; });
  }
}

}  // namespace

MomentSummary summarize(const std::vector<double>& x, double truth) {
  MomentSummary s;
  const double r = static_cast<double>(x.size());
  if (x.size() < 2) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = x.empty() ? nan : x[0];
    s.bias2 = x.empty() ? nan : (x[0] - truth) * (x[0] - truth);
    s.mcse_bias2 = s.var = s.mcse_var = nan;
    return s;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / r;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  s.var = m2 / (r - 1.0);
  m4 /= r;
  const double bias = s.mean - truth;
  s.bias2 = bias * bias;
  const double se2 = s.var / r;
  s.mcse_bias2 = std::sqrt(4.0 * bias * bias * se2 + 2.0 * se2 * se2);
  const double var_of_var = (m4 - s.var * s.var * (r - 3.0) / (r - 1.0)) / r;
  s.mcse_var = std::sqrt(std::max(0.0, var_of_var));
  return s;
}

const MonteCarloCell* MonteCarloTable::find(const std::vector<double>& params,
                                            const std::string& estimator,
                                            std::optional<double> xi) const {
  for (const auto& c : cells) {
    if (c.params != params || c.estimator != estimator) continue;
    if (xi.has_value() != c.xi.has_value()) continue;
    if (xi && std::abs(*xi - *c.xi) > 1e-9) continue;
    return &c;
  }
  return nullptr;
}

MonteCarloTable run_table1(const Table1Config& config) {
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.d < 3) throw ConfigError("table1 needs d >= 3");
  const std::size_t m = static_cast<std::size_t>(config.d * (config.d - 1) / 2);
  check_grid(config.xi_grid, m);
  const std::size_t threads = resolve_threads(config.threads);

  MonteCarloTable table;
  table.scale = 100.0;
  table.param_names = {"eps", "rho0", "d", "n"};
  for (std::size_t s = 0; s < config.epsilons.size(); ++s) {
    ScenarioConfig sc;
    sc.family = ScenarioFamily::kEquicorr;
    sc.d = config.d;
    sc.n = config.n;
    sc.rho0 = config.rho0;
    sc.epsilon = config.epsilons[s];
    // Surface an indefinite covariance as a configuration error up front.
    if (Eigen::LLT<Eigen::MatrixXd>(scenario_covariance(sc)).info() != Eigen::Success) {
      throw ConfigError("scenario covariance is not positive definite for eps = " +
                        std::to_string(sc.epsilon));
    }
    std::vector<Replication> reps(config.replications);
    parallel_for(config.replications, threads, [&](std::size_t r) {
      Replication out;
      try {
        CounterRng rng(config.seed, stream_id(s, r));
        const Eigen::MatrixXd data = sample_scenario(sc, rng);
        const CompositeDesign design = make_equicorr_design(data);
        Eigen::VectorXd theta = equicorr_initial(data);
        for (double xi : config.xi_grid) {
          const FitResult fit = fit_dmcle(design, xi, theta);
          if (!fit.converged) return;
          out.estimates.push_back(fit.theta_hat[0]);
          theta = fit.theta_hat;
        }
        if (config.include_mle) {
          const ScalarMaxResult mle = equicorr_mle(data);
          if (!mle.converged) return;
          out.mle = mle.argmax;
        }
        out.ok = true;
      } catch (const Error&) {
        out.ok = false;
      }
      reps[r] = std::move(out);
    });
    append_cells(table,
                 {config.epsilons[s], config.rho0, static_cast<double>(config.d),
                  static_cast<double>(config.n)},
                 reps, config.xi_grid, config.rho0, config.include_mle);
  }
  return table;
}

MonteCarloTable run_table2(const Table2Config& config) {
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.d < 2) throw ConfigError("table2 needs d >= 2");
  check_grid(config.xi_grid, static_cast<std::size_t>(config.d));
  const std::size_t threads = resolve_threads(config.threads);

  MonteCarloTable table;
  table.scale = 1000.0;
  table.param_names = {"n", "m_star", "d", "shift"};
  std::size_t s = 0;
  for (std::size_t n : config.ns) {
    if (n < 2) throw ConfigError("table2 needs n >= 2");
    for (int m_star : config.m_stars) {
      ScenarioConfig sc;
      sc.family = ScenarioFamily::kHeteroLocation;
      sc.d = config.d;
      sc.n = n;
      sc.mu0 = config.mu0;
      sc.m_star = m_star;
      sc.shift = config.shift;
      scenario_mean(sc);  // validates m_star
      std::vector<Replication> reps(config.replications);
      parallel_for(config.replications, threads, [&](std::size_t r) {
        Replication out;
        try {
          CounterRng rng(config.seed, stream_id(s, r));
          const Eigen::MatrixXd data = sample_scenario(sc, rng);
          double mu = data.mean();
          for (double xi : config.xi_grid) {
            const LocationFit fit = hetero_location_fixed_point(data, xi, mu);
            if (!fit.converged) return;
            out.estimates.push_back(fit.mu);
            mu = fit.mu;
          }
          if (config.include_mle) out.mle = inverse_variance_mean(data);
          out.ok = true;
        } catch (const Error&) {
          out.ok = false;
        }
        reps[r] = std::move(out);
      });
      append_cells(table,
                   {static_cast<double>(n), static_cast<double>(m_star),
                    static_cast<double>(config.d), config.shift},
                   reps, config.xi_grid, config.mu0, config.include_mle);
      ++s;
    }
  }
  return table;
}

std::vector<MaxBiasRow> run_maxbias_curves(int m, const std::vector<int>& m_star_list,
                                           const std::vector<double>& alpha1_list, double h1,
                                           const std::vector<double>& delta_grid) {
  std::vector<MaxBiasRow> rows;
  for (int m_star : m_star_list) {
    for (double alpha1 : alpha1_list) {
      for (double delta : delta_grid) {
        rows.push_back({m, m_star, alpha1, delta, max_bias_bound(delta, m, m_star, alpha1, 1.0, 1.0, h1)});
      }
    }
  }
  return rows;
}

CsvTable to_csv_table(const MonteCarloTable& table) {
  CsvTable out;
  out.header = table.param_names;
  for (const char* h : {"estimator", "xi", "bias2_scaled", "var_scaled", "mcse_bias2", "mcse_var",
                        "failures", "used"}) {
    out.header.emplace_back(h);
  }
  for (const auto& c : table.cells) {
    std::vector<std::string> row;
    for (double p : c.params) row.push_back(format_double(p));
    row.push_back(c.estimator);
    row.push_back(c.xi ? format_double(*c.xi) : "");
    row.push_back(format_double(c.bias2_scaled));
    row.push_back(format_double(c.var_scaled));
    row.push_back(format_double(c.mcse_bias2));
    row.push_back(format_double(c.mcse_var));
    row.push_back(std::to_string(c.failures));
    row.push_back(std::to_string(c.used));
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvTable to_csv_table(const std::vector<MaxBiasRow>& rows) {
  CsvTable out;
  out.header = {"m", "m_star", "alpha1", "delta", "max_bias"};
  for (const auto& r : rows) {
    out.rows.push_back({std::to_string(r.m), std::to_string(r.m_star), format_double(r.alpha1),
                        format_double(r.delta), format_double(r.bound)});
  }
  return out;
}

nlohmann::json to_json(const Table1Config& c) {
  return {{"epsilons", c.epsilons}, {"rho0", c.rho0},         {"d", c.d},
          {"n", c.n},               {"xi_grid", c.xi_grid},   {"replications", c.replications},
          {"seed", c.seed},         {"include_mle", c.include_mle}};
}

nlohmann::json to_json(const Table2Config& c) {
  return {{"ns", c.ns},           {"m_stars", c.m_stars},   {"d", c.d},
          {"mu0", c.mu0},         {"shift", c.shift},       {"xi_grid", c.xi_grid},
          {"replications", c.replications}, {"seed", c.seed}, {"include_mle", c.include_mle}};
}

nlohmann::json run_metadata(const nlohmann::json& config, std::uint64_t seed, double wall_seconds,
                            std::size_t threads) {
  return {{"config", config},
          {"seed", seed},
          {"rng", std::string(CounterRng::kAlgorithm)},
          {"wall_seconds", wall_seconds},
          {"threads", threads}};
}

}  // namespace dmcle
