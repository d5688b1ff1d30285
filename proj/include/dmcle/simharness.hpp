#pragma once

// Seeded Monte Carlo runs for the equicorrelation and location experiments
// and the worst-case bias curves.
//
// Replication r of scenario s draws from CounterRng(seed, (s << 32) | r), so
// results do not depend on how replications are spread over threads.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmcle/csv.hpp"
#include "dmcle/estimator.hpp"

namespace dmcle {

struct MonteCarloCell {
  std::vector<double> params;  // values for MonteCarloTable::param_names
  std::string estimator;       // "mle" or "dmcle"
  std::optional<double> xi;    // empty for the MLE
  double truth = 0.0;
  double mean = 0.0;
  double bias2_scaled = 0.0;
  double var_scaled = 0.0;
  double mcse_bias2 = 0.0;
  double mcse_var = 0.0;
  std::size_t used = 0;
  std::size_t failures = 0;
};

struct MonteCarloTable {
  double scale = 1.0;
  std::vector<std::string> param_names;
  std::vector<MonteCarloCell> cells;

  // Matches params exactly, xi within 1e-9; nullptr when absent.
  const MonteCarloCell* find(const std::vector<double>& params, const std::string& estimator,
                             std::optional<double> xi = std::nullopt) const;
};

struct Table1Config {
  std::vector<double> epsilons{1.0, 3.0, 5.0};
  double rho0 = 0.5;
  int d = 5;
  std::size_t n = 50;
  std::vector<double> xi_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t replications = 2000;
  std::uint64_t seed = 20240101;
  bool include_mle = true;
  // 0: DMCLE_THREADS, else the hardware concurrency.
  std::size_t threads = 0;
};

struct Table2Config {
  std::vector<std::size_t> ns{10, 100};
  std::vector<int> m_stars{0, 2};
  int d = 10;
  double mu0 = 0.0;
  double shift = 1.0;
  std::vector<double> xi_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::size_t replications = 2000;
  std::uint64_t seed = 20240101;
  bool include_mle = true;
  std::size_t threads = 0;
};

// Bias^2 and variance of the estimated correlation against rho0, x100.
MonteCarloTable run_table1(const Table1Config& config);
// Bias^2 and variance of the estimated location against mu0, x1000.
MonteCarloTable run_table2(const Table2Config& config);

struct MaxBiasRow {
  int m = 0;
  int m_star = 0;
  double alpha1 = 0.0;
  double delta = 0.0;
  double bound = 0.0;
};

// Every (m_star, alpha1) combination over delta_grid with c1 = c2 = 1.
std::vector<MaxBiasRow> run_maxbias_curves(int m, const std::vector<int>& m_star_list,
                                           const std::vector<double>& alpha1_list, double h1,
                                           const std::vector<double>& delta_grid);

CsvTable to_csv_table(const MonteCarloTable& table);
CsvTable to_csv_table(const std::vector<MaxBiasRow>& rows);

nlohmann::json to_json(const Table1Config& config);
nlohmann::json to_json(const Table2Config& config);

// Sidecar next to a result file: config echo, seed, generator name, wall time.
nlohmann::json run_metadata(const nlohmann::json& config, std::uint64_t seed, double wall_seconds,
                            std::size_t threads);

// Requested > 0 wins; otherwise DMCLE_THREADS caps the hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

// Monte Carlo standard errors for a sample of estimates about `truth`:
// {bias^2, mcse(bias^2), var, mcse(var)} on the unscaled level.
struct MomentSummary {
  double mean = 0.0;
  double bias2 = 0.0;
  double mcse_bias2 = 0.0;
  double var = 0.0;
  double mcse_var = 0.0;
};
MomentSummary summarize(const std::vector<double>& estimates, double truth);

}  // namespace dmcle
