#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmcle/errors.hpp"
#include "dmcle/estimator.hpp"
#include "dmcle/models/equicorr.hpp"
#include "dmcle/models/gev.hpp"
#include "dmcle/models/hetero_location.hpp"
#include "dmcle/models/scenario.hpp"
#include "dmcle/models/smith.hpp"
#include "dmcle/simharness.hpp"
#include "dmcle/tilt.hpp"

namespace py = pybind11;
using namespace dmcle;

namespace {

VarianceMethod parse_method(const std::string& name) {
  if (name == "plugin") return VarianceMethod::kPlugin;
  if (name == "jackknife") return VarianceMethod::kJackknife;
  throw ConfigError("variance method must be plugin or jackknife");
}

py::list table_rows(const MonteCarloTable& t) {
  py::list rows;
  for (const auto& c : t.cells) {
    py::dict d;
    for (std::size_t i = 0; i < t.param_names.size(); ++i) d[py::str(t.param_names[i])] = c.params[i];
    d["estimator"] = c.estimator;
    d["xi"] = c.xi ? py::object(py::float_(*c.xi)) : py::object(py::none());
    d["bias2_scaled"] = c.bias2_scaled;
    d["var_scaled"] = c.var_scaled;
    d["mcse_bias2"] = c.mcse_bias2;
    d["mcse_var"] = c.mcse_var;
    d["failures"] = c.failures;
    d["used"] = c.used;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_dmcle, m) {
  m.doc() = "Discriminative maximum composite likelihood estimation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InfeasibleDivergenceError>(m, "InfeasibleDivergenceError", base.ptr());
  py::register_exception<DegenerateTiltError>(m, "DegenerateTiltError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<RankDeficiencyError>(m, "RankDeficiencyError", base.ptr());
  py::register_exception<SelectionError>(m, "SelectionError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());

  m.def("kl_divergence", py::overload_cast<const Eigen::VectorXd&>(&kl_divergence), py::arg("w"));
  m.def("tilt_weights", py::overload_cast<const Eigen::VectorXd&, double>(&tilt_weights),
        py::arg("ell"), py::arg("alpha1"));

  py::class_<TiltSolution>(m, "TiltSolution")
      .def_readonly("alpha1", &TiltSolution::alpha1)
      .def_readonly("alpha2", &TiltSolution::alpha2)
      .def_readonly("weights", &TiltSolution::weights)
      .def_readonly("achieved_xi", &TiltSolution::achieved_xi);
  m.def("solve_alpha1", py::overload_cast<const Eigen::VectorXd&, double>(&solve_alpha1),
        py::arg("ell"), py::arg("xi"));

  py::class_<CompositeDesign>(m, "CompositeDesign")
      .def_property_readonly("num_units", &CompositeDesign::num_units)
      .def_property_readonly("param_dim", &CompositeDesign::param_dim)
      .def_property_readonly("num_obs", &CompositeDesign::num_obs)
      .def_property_readonly("labels", &CompositeDesign::labels)
      .def("loglik_values", &CompositeDesign::loglik_values, py::arg("theta"))
      .def("scores", &CompositeDesign::scores, py::arg("theta"));

  m.def("equicorr_design", &make_equicorr_design, py::arg("data"));
  m.def("equicorr_initial", &equicorr_initial, py::arg("data"));
  m.def("hetero_location_design", &make_hetero_location_design, py::arg("data"),
        py::arg("labels") = std::vector<std::string>{});
  m.def("hetero_location_initial", &hetero_location_initial, py::arg("data"));
  m.def("smith_design", &make_smith_design, py::arg("z"), py::arg("coords"), py::arg("names"));
  m.def("smith_initial", &smith_initial, py::arg("z"), py::arg("coords"));

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("weight_tol", &FitOptions::weight_tol)
      .def_readwrite("max_outer", &FitOptions::max_outer)
      .def_readwrite("score_tol", &FitOptions::score_tol)
      .def_readwrite("max_inner", &FitOptions::max_inner)
      .def_readwrite("max_halvings", &FitOptions::max_halvings);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("theta_hat", &FitResult::theta_hat)
      .def_readonly("xi", &FitResult::xi)
      .def_readonly("weights", &FitResult::weights)
      .def_readonly("alpha1", &FitResult::alpha1)
      .def_readonly("outer_iterations", &FitResult::outer_iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("message", &FitResult::message)
      .def_readonly("score_norm", &FitResult::score_norm)
      .def_readonly("composite_loglik", &FitResult::composite_loglik)
      .def_readonly("se", &FitResult::se)
      .def_readonly("H", &FitResult::H)
      .def_readonly("K", &FitResult::K)
      .def_readonly("clic", &FitResult::clic)
      .def_property_readonly("trace_loglik", [](const FitResult& f) {
        std::vector<double> out;
        for (const auto& t : f.trace) out.push_back(t.composite_loglik);
        return out;
      });

  m.def("composite_loglik", &composite_loglik, py::arg("design"), py::arg("theta"), py::arg("weights"));
  m.def("weighted_score", &weighted_score, py::arg("design"), py::arg("theta"), py::arg("weights"));
  m.def("profiled_loglik", &profiled_loglik, py::arg("design"), py::arg("theta"), py::arg("xi"));
  m.def("fit_dmcle", &fit_dmcle, py::arg("design"), py::arg("xi"), py::arg("theta0"),
        py::arg("options") = FitOptions{});
  m.def(
      "attach_inference",
      [](const CompositeDesign& d, FitResult fit, const std::string& method) {
        attach_inference(d, fit, parse_method(method));
        return fit;
      },
      py::arg("design"), py::arg("fit"), py::arg("method") = "plugin",
      "Returns a copy of fit with se, H, K and clic filled in.");

  py::class_<XiSelectionResult>(m, "XiSelectionResult")
      .def_readonly("grid", &XiSelectionResult::grid)
      .def_readonly("estimates", &XiSelectionResult::estimates)
      .def_readonly("valid", &XiSelectionResult::valid)
      .def_readonly("tau", &XiSelectionResult::tau)
      .def_readonly("chosen_xi", &XiSelectionResult::chosen_xi)
      .def_readonly("chosen_index", &XiSelectionResult::chosen_index)
      .def_readonly("selected", &XiSelectionResult::selected);
  m.def("select_xi", &select_xi, py::arg("design"), py::arg("grid"), py::arg("tau") = py::none(),
        py::arg("theta0"), py::arg("options") = FitOptions{});
  m.def("cpp_profile", &cpp_profile, py::arg("design"), py::arg("grid"), py::arg("theta0"),
        py::arg("options") = FitOptions{});
  m.def("default_xi_grid", &default_xi_grid, py::arg("m"));
  m.def("max_bias_bound", &max_bias_bound, py::arg("delta"), py::arg("m"), py::arg("m_star"),
        py::arg("alpha1_star"), py::arg("c1") = 1.0, py::arg("c2") = 1.0, py::arg("h1") = 1.0);

  m.def("smith_pair_density", &smith_pair_density, py::arg("z_j"), py::arg("z_k"), py::arg("h"),
        py::arg("sigma"));
  m.def("smith_pair_cdf", &smith_pair_cdf, py::arg("z_j"), py::arg("z_k"), py::arg("h"), py::arg("sigma"));

  py::class_<GevMargin>(m, "GevMargin")
      .def(py::init([](double loc, double scale, double shape) { return GevMargin{loc, scale, shape}; }),
           py::arg("location") = 0.0, py::arg("scale") = 1.0, py::arg("shape") = 0.0)
      .def_readwrite("location", &GevMargin::location)
      .def_readwrite("scale", &GevMargin::scale)
      .def_readwrite("shape", &GevMargin::shape);
  m.def(
      "frechet_transform",
      [](const Eigen::VectorXd& y, const GevMargin& g) {
        const FrechetColumn c = frechet_transform(y, g);
        return py::make_tuple(c.z, c.boundary);
      },
      py::arg("y"), py::arg("margin"), "Returns (z, boundary_indices).");
  m.def("fit_gev_lmoments", &fit_gev_lmoments, py::arg("y"));

  m.def(
      "sample_scenario",
      [](const std::string& family, std::size_t n, int d, std::uint64_t seed, double rho0,
         double epsilon, int m_star, double shift) {
        ScenarioConfig c;
        c.family = parse_family(family);
        c.n = n;
        c.d = d;
        c.rho0 = rho0;
        c.epsilon = epsilon;
        c.m_star = m_star;
        c.shift = shift;
        return sample_scenario(c, seed);
      },
      py::arg("family"), py::arg("n"), py::arg("d"), py::arg("seed"), py::arg("rho0") = 0.5,
      py::arg("epsilon") = 1.0, py::arg("m_star") = 0, py::arg("shift") = 1.0);

  m.def(
      "run_table1",
      [](std::vector<double> eps, std::size_t reps, std::uint64_t seed, std::vector<double> grid) {
        Table1Config c;
        c.epsilons = std::move(eps);
        c.replications = reps;
        c.seed = seed;
        if (!grid.empty()) c.xi_grid = std::move(grid);
        return table_rows(run_table1(c));
      },
      py::arg("epsilons") = std::vector<double>{1.0, 3.0, 5.0}, py::arg("replications") = 2000,
      py::arg("seed") = 20240101, py::arg("xi_grid") = std::vector<double>{});
  m.def(
      "run_table2",
      [](std::vector<std::size_t> ns, std::vector<int> m_stars, std::size_t reps, std::uint64_t seed,
         std::vector<double> grid) {
        Table2Config c;
        c.ns = std::move(ns);
        c.m_stars = std::move(m_stars);
        c.replications = reps;
        c.seed = seed;
        if (!grid.empty()) c.xi_grid = std::move(grid);
        return table_rows(run_table2(c));
      },
      py::arg("ns") = std::vector<std::size_t>{10, 100}, py::arg("m_stars") = std::vector<int>{0, 2},
      py::arg("replications") = 2000, py::arg("seed") = 20240101,
      py::arg("xi_grid") = std::vector<double>{});
}
