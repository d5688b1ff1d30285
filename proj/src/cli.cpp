#include "dmcle/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dmcle/csv.hpp"
#include "dmcle/errors.hpp"
#include "dmcle/estimator.hpp"
#include "dmcle/models/equicorr.hpp"
#include "dmcle/models/gev.hpp"
#include "dmcle/models/hetero_location.hpp"
#include "dmcle/models/smith.hpp"
#include "dmcle/simharness.hpp"

namespace dmcle::cli {

using json = nlohmann::json;

namespace {

json options_defaults() {
  const FitOptions o;
  return {{"weight_tol", o.weight_tol}, {"max_outer", o.max_outer}, {"score_tol", o.score_tol},
          {"max_inner", o.max_inner},   {"max_halvings", o.max_halvings}};
}

json model_defaults(const std::string& command) {
  json j = {{"command", command},   {"input", nullptr},        {"coords", nullptr},
            {"model", "equicorr"}, {"margins", "lmoments"},   {"theta0", nullptr},
            {"out", nullptr},      {"options", options_defaults()}};
  if (command == "fit") {
    j["xi"] = 0.0;
    j["variance"] = "plugin";
  } else {
    // null: 0, 0.05, ..., 0.65, log 2 below log m
    j["xi_grid"] = nullptr;
  }
  if (command == "select-xi") j["tau"] = nullptr;  // null: 5% of |theta_hat(0)|
  return j;
}

std::vector<double> default_delta_grid() {
  std::vector<double> grid;
  for (int i = -40; i <= 40; ++i) grid.push_back(i / 10.0);
  return grid;
}

json simulate_defaults(const std::string& scenario) {
  json j;
  if (scenario == "table1") {
    j = to_json(Table1Config{});
  } else if (scenario == "table2") {
    j = to_json(Table2Config{});
  } else if (scenario == "maxbias") {
    j = {{"m", 10},
         {"m_stars", {0, 1, 2, 3, 4}},
         {"alpha1s", {0.0, 1.0, 2.0, 3.0, 4.0}},
         {"h1", 1.0},
         {"delta_grid", default_delta_grid()}};
  } else {
    throw ConfigError("unknown scenario '" + scenario + "' (expected table1, table2 or maxbias)");
  }
  j["command"] = "simulate";
  j["scenario"] = scenario;
  j["out"] = nullptr;
  return j;
}

void merge_into(json& target, const json& src, const std::string& prefix) {
  if (!src.is_object()) throw ConfigError("config " + (prefix.empty() ? "file" : prefix) + " must be a JSON object");
  for (const auto& [key, value] : src.items()) {
    if (!target.contains(key)) throw ConfigError("unknown config key '" + prefix + key + "'");
    if (target[key].is_object()) {
      merge_into(target[key], value, prefix + key + ".");
    } else {
      target[key] = value;
    }
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(parse_double(item));
    } catch (const DataError&) {
      throw ConfigError("grid '" + spec + "' must be start:step:end");
    }
  }
  if (parts.size() != 3) throw ConfigError("grid '" + spec + "' must be start:step:end");
  return make_xi_grid(parts[0], parts[1], parts[2]);
}

// xi_grid may be given as an array or as a "start:step:end" string.
std::optional<std::vector<double>> grid_value(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) return parse_grid_spec(v.get<std::string>());
  return v.get<std::vector<double>>();
}

void write_text(const json& cfg, std::ostream& out, const std::string& text) {
  if (cfg["out"].is_null()) {
    out << text;
    return;
  }
  const auto path = cfg["out"].get<std::string>();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

// CSV outputs carry their config in a sidecar; stdout runs echo it to err.
void write_sidecar(const json& cfg, const json& meta, std::ostream& err) {
  if (cfg["out"].is_null()) {
    err << "# metadata: " << meta.dump() << "\n";
    return;
  }
  const auto path = cfg["out"].get<std::string>() + ".meta.json";
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path);
  f << meta.dump(2) << "\n";
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

FitOptions fit_options(const json& o) {
  FitOptions f;
  f.weight_tol = o.at("weight_tol").get<double>();
  f.max_outer = o.at("max_outer").get<int>();
  f.score_tol = o.at("score_tol").get<double>();
  f.max_inner = o.at("max_inner").get<int>();
  f.max_halvings = o.at("max_halvings").get<int>();
  if (!(f.weight_tol > 0.0) || !(f.score_tol > 0.0) || f.max_outer < 1 || f.max_inner < 1 ||
      f.max_halvings < 0) {
    throw ConfigError("options: tolerances must be positive and iteration limits >= 1");
  }
  return f;
}

struct LoadedModel {
  std::unique_ptr<CompositeDesign> design;
  Eigen::VectorXd theta0;
  std::vector<std::string> param_names;
  json margins;  // fitted or given GEV margins (smith only)
  std::size_t boundary = 0;
};

LoadedModel load_model(const json& cfg, std::ostream& err) {
  if (cfg["input"].is_null()) throw ConfigError("--input is required");
  const auto model = cfg["model"].get<std::string>();
  if (model != "equicorr" && model != "hetero-location" && model != "smith") {
    throw ConfigError("unknown model '" + model + "'");
  }
  const CsvTable table = read_csv(cfg["input"].get<std::string>());
  if (table.rows.size() < 2) throw DataError("input needs at least two rows");
  const Eigen::MatrixXd data = numeric_matrix(table);

  LoadedModel lm;
  try {
    if (model == "equicorr") {
      lm.design = std::make_unique<CompositeDesign>(make_equicorr_design(data));
      lm.theta0 = equicorr_initial(data);
      lm.param_names = {"rho"};
    } else if (model == "hetero-location") {
      lm.design = std::make_unique<CompositeDesign>(make_hetero_location_design(data, table.header));
      lm.theta0 = hetero_location_initial(data);
      lm.param_names = {"mu"};
      for (const auto& h : table.header) lm.param_names.push_back("log_sigma2_" + h);
    } else {
      if (cfg["coords"].is_null()) throw ConfigError("--coords is required for the smith model");
      const CsvTable ct = read_csv(cfg["coords"].get<std::string>());
      if (ct.header.size() != 3) throw DataError("coordinates CSV needs columns: station, x, y");
      Eigen::MatrixXd coords(data.cols(), 2);
      for (std::size_t j = 0; j < table.header.size(); ++j) {
        bool found = false;
        for (const auto& row : ct.rows) {
          if (row[0] == table.header[j]) {
            coords(static_cast<Eigen::Index>(j), 0) = parse_double(row[1]);
            coords(static_cast<Eigen::Index>(j), 1) = parse_double(row[2]);
            found = true;
            break;
          }
        }
        if (!found) throw DataError("no coordinates for station '" + table.header[j] + "'");
      }
      Eigen::MatrixXd z(data.rows(), data.cols());
      const json& mspec = cfg["margins"];
      lm.margins = json::array();
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        if (mspec.is_string() && mspec.get<std::string>() == "unit-frechet") {
          if ((data.col(j).array() <= 0.0).any()) {
            throw DataError("unit-frechet input must be positive (column '" +
                            table.header[static_cast<std::size_t>(j)] + "')");
          }
          z.col(j) = data.col(j);
          continue;
        }
        GevMargin g;
        if (mspec.is_string() && mspec.get<std::string>() == "lmoments") {
          g = fit_gev_lmoments(data.col(j));
        } else if (mspec.is_array() && static_cast<Eigen::Index>(mspec.size()) == data.cols()) {
          const json& e = mspec[static_cast<std::size_t>(j)];
          g = {e.at("location").get<double>(), e.at("scale").get<double>(), e.at("shape").get<double>()};
        } else {
          throw ConfigError("margins must be \"lmoments\", \"unit-frechet\" or one "
                            "{location, scale, shape} object per station");
        }
        lm.margins.push_back({{"station", table.header[static_cast<std::size_t>(j)]},
                              {"location", g.location},
                              {"scale", g.scale},
                              {"shape", g.shape}});
        const FrechetColumn fc = frechet_transform(data.col(j), g);
        z.col(j) = fc.z;
        if (!fc.boundary.empty()) {
          err << "warning: " << fc.boundary.size() << " observation(s) of station '"
              << table.header[static_cast<std::size_t>(j)] << "' on the GEV support boundary, clamped\n";
        }
        lm.boundary += fc.boundary.size();
      }
      lm.design = std::make_unique<CompositeDesign>(make_smith_design(z, coords, table.header));
      lm.theta0 = smith_initial(z, coords);
      lm.param_names = {"log_L11", "L21", "log_L22"};
    }
  } catch (const ValidationError& e) {
    throw DataError(e.what());
  }
  if (!cfg["theta0"].is_null()) {
    const auto t = cfg["theta0"].get<std::vector<double>>();
    if (t.size() != lm.param_names.size()) {
      throw ConfigError("theta0 needs " + std::to_string(lm.param_names.size()) + " entries");
    }
    lm.theta0 = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  }
  return lm;
}

json natural_parameters(const std::string& model, const Eigen::VectorXd& theta) {
  if (model == "equicorr") return {{"rho", theta[0]}};
  if (model == "hetero-location") {
    return {{"mu", theta[0]}, {"sigma2", vec_json(theta.tail(theta.size() - 1).array().exp().matrix())}};
  }
  return {{"Sigma", mat_json(smith_from_unconstrained(theta.head<3>()))}};
}

void check_xi(double xi, std::size_t m) {
  const double cap = std::log(static_cast<double>(m));
  if (!(xi >= 0.0) || !(xi < cap)) {
    throw InfeasibleDivergenceError("infeasible divergence: xi = " + format_double(xi) +
                                    " must lie in [0, log m) = [0, " + format_double(cap) + ")");
  }
}

std::vector<double> resolve_grid(json& cfg, std::size_t m) {
  auto grid = grid_value(cfg["xi_grid"]);
  if (!grid) grid = default_xi_grid(m);
  for (double xi : *grid) check_xi(xi, m);
  cfg["xi_grid"] = *grid;
  return *grid;
}

int cmd_fit(json cfg, std::ostream& out, std::ostream& err) {
  const auto method_name = cfg["variance"].get<std::string>();
  if (method_name != "plugin" && method_name != "jackknife") {
    throw ConfigError("variance must be plugin or jackknife");
  }
  const FitOptions options = fit_options(cfg["options"]);
  const LoadedModel lm = load_model(cfg, err);
  const double xi = cfg["xi"].get<double>();
  check_xi(xi, lm.design->num_units());
  cfg["theta0"] = vec_json(lm.theta0);

  FitResult fit = fit_dmcle(*lm.design, xi, lm.theta0, options);
  json inference_error = nullptr;
  if (fit.converged) {
    try {
      attach_inference(*lm.design, fit,
                       method_name == "plugin" ? VarianceMethod::kPlugin : VarianceMethod::kJackknife);
    } catch (const RankDeficiencyError& e) {
      inference_error = e.what();
    }
  }
  const auto labels = lm.design->labels();
  json weights = json::array();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    weights.push_back({{"label", labels[j]}, {"weight", fit.weights[static_cast<Eigen::Index>(j)]}});
  }
  json trace = json::array();
  for (const auto& t : fit.trace) trace.push_back(t.composite_loglik);

  json result = {{"config", cfg},
                 {"model", cfg["model"]},
                 {"param_names", lm.param_names},
                 {"theta_hat", vec_json(fit.theta_hat)},
                 {"parameters", natural_parameters(cfg["model"].get<std::string>(), fit.theta_hat)},
                 {"weights", weights},
                 {"alpha1", fit.alpha1},
                 {"xi", fit.xi},
                 {"converged", fit.converged},
                 {"message", fit.message},
                 {"outer_iterations", fit.outer_iterations},
                 {"score_norm", fit.score_norm},
                 {"composite_loglik", fit.composite_loglik},
                 {"trace_summary",
                  {{"entries", fit.trace.size()}, {"composite_loglik", trace}}},
                 {"se", fit.se ? vec_json(*fit.se) : json(nullptr)},
                 {"H", fit.se ? mat_json(fit.H) : json(nullptr)},
                 {"K", fit.se ? mat_json(fit.K) : json(nullptr)},
                 {"clic", fit.clic ? json(*fit.clic) : json(nullptr)},
                 {"inference_error", inference_error}};
  if (cfg["model"] == "smith") {
    result["margins_fitted"] = lm.margins;
    result["boundary_observations"] = lm.boundary;
  }
  write_text(cfg, out, result.dump(2) + "\n");
  if (!fit.converged) {
    err << "fit did not converge: " << fit.message << "\n";
    return kExitNonConvergence;
  }
  if (!inference_error.is_null()) {
    err << "inference failed: " << inference_error.get<std::string>() << "\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int cmd_cpp(json cfg, std::ostream& out, std::ostream& err) {
  const FitOptions options = fit_options(cfg["options"]);
  const LoadedModel lm = load_model(cfg, err);
  const auto grid = resolve_grid(cfg, lm.design->num_units());
  cfg["theta0"] = vec_json(lm.theta0);
  const Eigen::MatrixXd w = cpp_profile(*lm.design, grid, lm.theta0, options);
  CsvTable t;
  t.header.push_back("xi");
  for (const auto& l : lm.design->labels()) t.header.push_back(l);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row{format_double(grid[i])};
    for (Eigen::Index j = 0; j < w.cols(); ++j) row.push_back(format_double(w(static_cast<Eigen::Index>(i), j)));
    t.rows.push_back(std::move(row));
  }
  write_text(cfg, out, to_csv(t));
  write_sidecar(cfg, {{"config", cfg}}, err);
  return kExitOk;
}

int cmd_select_xi(json cfg, std::ostream& out, std::ostream& err) {
  const FitOptions options = fit_options(cfg["options"]);
  const LoadedModel lm = load_model(cfg, err);
  const auto grid = resolve_grid(cfg, lm.design->num_units());
  if (grid.size() < 2 || grid.front() != 0.0) {
    throw ConfigError("xi grid must start at 0 and have at least two points");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("xi grid must be strictly increasing");
  }
  std::optional<double> tau;
  if (!cfg["tau"].is_null()) {
    tau = cfg["tau"].get<double>();
    if (!(*tau >= 0.0)) throw ConfigError("tau must be nonnegative");
  }
  cfg["theta0"] = vec_json(lm.theta0);
  const XiSelectionResult sel = select_xi(*lm.design, grid, tau, lm.theta0, options);
  cfg["tau"] = sel.tau;
  json estimates = json::array();
  for (const auto& e : sel.estimates) estimates.push_back(vec_json(e));
  json result = {{"config", cfg},
                 {"param_names", lm.param_names},
                 {"grid", sel.grid},
                 {"estimates", estimates},
                 {"valid", sel.valid},
                 {"tau", sel.tau},
                 {"chosen_xi", sel.chosen_xi},
                 {"chosen_index", sel.chosen_index},
                 {"selected", sel.selected}};
  write_text(cfg, out, result.dump(2) + "\n");
  if (!sel.selected) err << "no consecutive grid pair moved less than tau; reporting the largest valid xi\n";
  return kExitOk;
}

int cmd_simulate(json cfg, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto scenario = cfg["scenario"].get<std::string>();
  CsvTable table;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  if (scenario == "table1") {
    Table1Config c;
    c.epsilons = cfg["epsilons"].get<std::vector<double>>();
    c.rho0 = cfg["rho0"].get<double>();
    c.d = cfg["d"].get<int>();
    c.n = cfg["n"].get<std::size_t>();
    c.xi_grid = *grid_value(cfg["xi_grid"]);
    c.replications = cfg["replications"].get<std::size_t>();
    c.seed = seed = cfg["seed"].get<std::uint64_t>();
    c.include_mle = cfg["include_mle"].get<bool>();
    cfg["xi_grid"] = c.xi_grid;
    threads = resolve_threads(0);
    table = to_csv_table(run_table1(c));
  } else if (scenario == "table2") {
    Table2Config c;
    c.ns = cfg["ns"].get<std::vector<std::size_t>>();
    c.m_stars = cfg["m_stars"].get<std::vector<int>>();
    c.d = cfg["d"].get<int>();
    c.mu0 = cfg["mu0"].get<double>();
    c.shift = cfg["shift"].get<double>();
    c.xi_grid = *grid_value(cfg["xi_grid"]);
    c.replications = cfg["replications"].get<std::size_t>();
    c.seed = seed = cfg["seed"].get<std::uint64_t>();
    c.include_mle = cfg["include_mle"].get<bool>();
    cfg["xi_grid"] = c.xi_grid;
    threads = resolve_threads(0);
    table = to_csv_table(run_table2(c));
  } else {
    const auto m_stars = cfg["m_stars"].get<std::vector<int>>();
    const auto alphas = cfg["alpha1s"].get<std::vector<double>>();
    const auto deltas = cfg["delta_grid"].get<std::vector<double>>();
    try {
      table = to_csv_table(run_maxbias_curves(cfg["m"].get<int>(), m_stars, alphas,
                                              cfg["h1"].get<double>(), deltas));
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
  }
  write_text(cfg, out, to_csv(table));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_sidecar(cfg, run_metadata(cfg, seed, wall, threads), err);
  return kExitOk;
}

struct Flags {
  std::string config;
  std::optional<std::string> input, coords, model, variance, margins, out, xi_grid, delta_grid;
  std::optional<double> xi, tau, h1;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<int> m;
  std::vector<double> eps, alphas;
  std::vector<std::size_t> ns;
  std::vector<int> m_stars;
  bool no_mle = false;
  bool show_defaults = false;
  std::string scenario;
};

void add_model_options(CLI::App* sub, Flags& f) {
  sub->add_option("--input", f.input, "headered CSV, one column per variable or station");
  sub->add_option("--coords", f.coords, "station coordinates CSV (station, x, y) for smith");
  sub->add_option("--model", f.model, "equicorr | hetero-location | smith")
      ->check(CLI::IsMember({"equicorr", "hetero-location", "smith"}));
  sub->add_option("--margins", f.margins, "smith margins: lmoments | unit-frechet");
  sub->add_option("--out", f.out, "output file (default: stdout)");
  sub->add_option("--config", f.config, "JSON config; command-line flags override it");
  sub->add_flag("--show-defaults", f.show_defaults, "print this command's defaults and exit");
}

template <class T>
void set_if(json& cfg, const char* key, const std::optional<T>& v) {
  if (v) cfg[key] = *v;
}

json resolve_model_config(const std::string& command, const Flags& f) {
  json cfg = model_defaults(command);
  if (!f.config.empty()) merge_into(cfg, read_json_file(f.config), "");
  if (cfg["command"] != command) throw ConfigError("config file is for command " + cfg["command"].dump());
  set_if(cfg, "input", f.input);
  set_if(cfg, "coords", f.coords);
  set_if(cfg, "model", f.model);
  set_if(cfg, "margins", f.margins);
  set_if(cfg, "out", f.out);
  if (command == "fit") {
    set_if(cfg, "xi", f.xi);
    set_if(cfg, "variance", f.variance);
  } else {
    set_if(cfg, "xi_grid", f.xi_grid);
    if (f.xi_grid) cfg["xi_grid"] = parse_grid_spec(*f.xi_grid);
  }
  if (command == "select-xi") set_if(cfg, "tau", f.tau);
  return cfg;
}

json resolve_simulate_config(const Flags& f) {
  json file;
  if (!f.config.empty()) file = read_json_file(f.config);
  std::string scenario = f.scenario;
  if (scenario.empty()) {
    scenario = file.is_object() && file.contains("scenario") ? file["scenario"].get<std::string>() : "table1";
  }
  json cfg = simulate_defaults(scenario);
  if (!file.is_null()) merge_into(cfg, file, "");
  if (cfg["command"] != "simulate") throw ConfigError("config file is for command " + cfg["command"].dump());
  if (cfg["scenario"] != scenario) throw ConfigError("config file is for scenario " + cfg["scenario"].dump());
  auto need = [&](bool given, const char* flag, const char* key) {
    if (given && !cfg.contains(key)) throw ConfigError(std::string(flag) + " does not apply to " + scenario);
    return given;
  };
  if (need(!f.eps.empty(), "--eps", "epsilons")) cfg["epsilons"] = f.eps;
  if (!f.ns.empty()) {
    if (scenario == "table1") {
      if (f.ns.size() != 1) throw ConfigError("table1 takes a single --n");
      cfg["n"] = f.ns.front();
    } else if (need(true, "--n", "ns")) {
      cfg["ns"] = f.ns;
    }
  }
  if (need(!f.m_stars.empty(), "--mstar", "m_stars")) cfg["m_stars"] = f.m_stars;
  if (need(!f.alphas.empty(), "--alpha", "alpha1s")) cfg["alpha1s"] = f.alphas;
  if (need(f.m.has_value(), "--m", "m")) cfg["m"] = *f.m;
  if (need(f.h1.has_value(), "--h1", "h1")) cfg["h1"] = *f.h1;
  if (need(f.reps.has_value(), "--reps", "replications")) cfg["replications"] = *f.reps;
  if (need(f.seed.has_value(), "--seed", "seed")) cfg["seed"] = *f.seed;
  if (need(f.xi_grid.has_value(), "--xi-grid", "xi_grid")) cfg["xi_grid"] = parse_grid_spec(*f.xi_grid);
  if (need(f.delta_grid.has_value(), "--delta-grid", "delta_grid")) {
    const auto parts = parse_grid_spec(*f.delta_grid);
    cfg["delta_grid"] = parts;
  }
  if (need(f.no_mle, "--no-mle", "include_mle")) cfg["include_mle"] = false;
  set_if(cfg, "out", f.out);
  return cfg;
}

}  // namespace

json defaults() {
  json j;
  for (const char* c : {"fit", "cpp", "select-xi"}) j[c] = model_defaults(c);
  for (const char* s : {"table1", "table2", "maxbias"}) j["simulate"][s] = simulate_defaults(s);
  j["environment"] = {{"DMCLE_THREADS", "caps worker threads for simulate (default: all cores)"}};
  return j;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discriminative maximum composite likelihood estimation"};
  app.name("dmcle");
  Flags f;
  bool top_defaults = false;
  app.add_flag("--show-defaults", top_defaults, "print every default and exit");
  app.require_subcommand(0, 1);

  auto* fit = app.add_subcommand("fit", "fit at one xi and report weights, se, H, K and CLIC");
  add_model_options(fit, f);
  fit->add_option("--xi", f.xi, "KL divergence from uniform weights");
  fit->add_option("--variance", f.variance, "plugin | jackknife")
      ->check(CLI::IsMember({"plugin", "jackknife"}));

  auto* cpp = app.add_subcommand("cpp", "compatibility profile: fitted weights along a xi grid");
  add_model_options(cpp, f);
  cpp->add_option("--xi-grid", f.xi_grid, "start:step:end");

  auto* sel = app.add_subcommand("select-xi", "choose xi by the stability stopping rule");
  add_model_options(sel, f);
  sel->add_option("--xi-grid", f.xi_grid, "start:step:end");
  sel->add_option("--tau", f.tau, "stopping threshold on |theta(xi_k) - theta(xi_k-1)|");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo tables and worst-case bias curves");
  sim->add_option("scenario", f.scenario, "table1 | table2 | maxbias")
      ->check(CLI::IsMember({"table1", "table2", "maxbias"}));
  sim->add_option("--eps", f.eps, "table1 epsilon values")->delimiter(',');
  sim->add_option("--n", f.ns, "sample size(s)")->delimiter(',');
  sim->add_option("--mstar", f.m_stars, "number of shifted coordinates / drifted sub-models")->delimiter(',');
  sim->add_option("--m", f.m, "maxbias: number of sub-models");
  sim->add_option("--alpha", f.alphas, "maxbias: alpha1 values")->delimiter(',');
  sim->add_option("--h1", f.h1, "maxbias: Fisher information H1");
  sim->add_option("--delta-grid", f.delta_grid, "maxbias: start:step:end");
  sim->add_option("--reps", f.reps, "replications per scenario");
  sim->add_option("--seed", f.seed, "RNG seed");
  sim->add_option("--xi-grid", f.xi_grid, "start:step:end");
  sim->add_flag("--no-mle", f.no_mle, "skip the maximum likelihood column");
  sim->add_option("--out", f.out, "output CSV (default: stdout); metadata goes to <out>.meta.json");
  sim->add_option("--config", f.config, "JSON config; command-line flags override it");
  sim->add_flag("--show-defaults", f.show_defaults, "print this command's defaults and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (top_defaults || app.get_subcommands().empty()) {
      if (!top_defaults) {
        err << app.help();
        return kExitConfig;
      }
      out << defaults().dump(2) << "\n";
      return kExitOk;
    }
    CLI::App* used = app.get_subcommands().front();
    const std::string command = used->get_name();
    if (command == "simulate") {
      if (f.show_defaults) {
        out << (f.scenario.empty() ? defaults()["simulate"] : simulate_defaults(f.scenario)).dump(2) << "\n";
        return kExitOk;
      }
      return cmd_simulate(resolve_simulate_config(f), out, err);
    }
    if (f.show_defaults) {
      out << model_defaults(command).dump(2) << "\n";
      return kExitOk;
    }
    json cfg = resolve_model_config(command, f);
    if (command == "fit") return cmd_fit(std::move(cfg), out, err);
    if (command == "cpp") return cmd_cpp(std::move(cfg), out, err);
    return cmd_select_xi(std::move(cfg), out, err);
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleDivergenceError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const SelectionError& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const RankDeficiencyError& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace dmcle::cli
