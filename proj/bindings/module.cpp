#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bellvis/commands.hpp"
#include "bellvis/dense.hpp"
#include "bellvis/dsm.hpp"
#include "bellvis/errors.hpp"
#include "bellvis/implicit_lp.hpp"
#include "bellvis/mps.hpp"
#include "bellvis/quantum.hpp"
#include "bellvis/visibility.hpp"

namespace py = pybind11;
using namespace bellvis;

namespace {

SolverChoice parse_choice(const std::string& solver) {
  if (solver == "ipm") return SolverChoice::Ipm;
  if (solver == "simplex") return SolverChoice::Simplex;
  throw ConfigError("solver must be 'ipm' or 'simplex'");
}

IpmSettings ipm_settings_from(double epsilon, int rank, double objective_scale) {
  IpmSettings settings;
  settings.epsilon = epsilon;
  settings.chol_rank = rank;
  settings.objective_scale = objective_scale;
  return settings;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "critical visibility of entangled states via local-model LPs";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<int, int, std::vector<int>>(), py::arg("observers"), py::arg("outcomes"),
           py::arg("observables"))
      .def_static("two_setting_qubits", &ExperimentConfig::two_setting_qubits,
                  py::arg("observers"))
      .def_property_readonly("observers", &ExperimentConfig::observers)
      .def_property_readonly("outcomes", &ExperimentConfig::outcomes)
      .def_property_readonly("observables", &ExperimentConfig::observables)
      .def_property_readonly("reduced_row_count", &ExperimentConfig::reduced_row_count)
      .def_property_readonly("full_row_count", &ExperimentConfig::full_row_count)
      .def_property_readonly("assignment_count", &ExperimentConfig::assignment_count)
      .def("__repr__", [](const ExperimentConfig& c) {
        std::ostringstream os;
        os << "ExperimentConfig(observers=" << c.observers() << ", outcomes=" << c.outcomes()
           << ")";
        return os.str();
      });

  py::class_<PureState>(m, "PureState")
      .def(py::init<int, std::vector<std::complex<double>>>(), py::arg("observers"),
           py::arg("amplitudes"))
      .def_static("normalized", &PureState::normalized, py::arg("observers"),
                  py::arg("amplitudes"))
      .def_property_readonly("observers", &PureState::observers)
      .def_property_readonly("amplitudes", &PureState::amplitudes);

  m.def("make_ghz", &make_ghz, py::arg("observers"));

  py::class_<ObservableSetting>(m, "ObservableSetting")
      .def(py::init<double, double>(), py::arg("theta"), py::arg("phi"))
      .def_property_readonly("theta", &ObservableSetting::theta)
      .def_property_readonly("phi", &ObservableSetting::phi);

  py::class_<AngleVector>(m, "AngleVector")
      .def_static("from_flat",
                  [](const ExperimentConfig& config, const std::vector<double>& flat) {
                    return AngleVector::from_flat(config, flat);
                  },
                  py::arg("config"), py::arg("flat"))
      .def_static("random", &AngleVector::random, py::arg("config"), py::arg("seed"))
      .def("to_flat", &AngleVector::to_flat);

  m.def(
      "outcome_probability",
      [](const PureState& state, const std::vector<ObservableSetting>& chosen,
         const std::vector<int>& outcomes) {
        return outcome_probability(state, chosen, outcomes);
      },
      py::arg("state"), py::arg("chosen_settings"), py::arg("outcomes"),
      "Born probability of one outcome tuple under each observer's chosen setting");

  m.def(
      "critical_visibility",
      [](const PureState& state, const ExperimentConfig& config, const AngleVector& angles,
         const std::string& solver, double epsilon, int rank, double objective_scale) {
        return critical_visibility(state, config, angles, parse_choice(solver),
                                   ipm_settings_from(epsilon, rank, objective_scale));
      },
      py::arg("state"), py::arg("config"), py::arg("angles"), py::arg("solver") = "ipm",
      py::arg("epsilon") = 1e-5, py::arg("rank") = 100, py::arg("objective_scale") = 1.0,
      "Largest noise visibility at which a local model still reproduces the statistics");

  m.def(
      "minimize_critical_visibility",
      [](const PureState& state, const ExperimentConfig& config, const std::string& solver,
         double ftol, int restarts, int max_evaluations, std::uint64_t seed, double epsilon,
         int rank, double objective_scale) {
        DsmSettings dsm;
        dsm.ftol = ftol;
        dsm.restarts = restarts;
        dsm.max_evaluations = max_evaluations;
        dsm.rng_seed = seed;
        const DsmResult result = dsm_minimize(
            critical_visibility_objective(std::make_shared<const PureState>(state), config,
                                          parse_choice(solver),
                                          ipm_settings_from(epsilon, rank, objective_scale)),
            config, dsm);
        py::dict out;
        out["best_value"] = result.best_value;
        out["best_angles"] = result.best_angles.to_flat();
        out["evaluations"] = result.evaluations;
        out["converged"] = result.converged;
        out["per_restart_values"] = result.per_restart_values;
        return out;
      },
      py::arg("state"), py::arg("config"), py::arg("solver") = "ipm", py::arg("ftol") = 0.01,
      py::arg("restarts") = 5, py::arg("max_evaluations") = 2000, py::arg("seed") = 1,
      py::arg("epsilon") = 1e-5, py::arg("rank") = 100, py::arg("objective_scale") = 1.0,
      "Downhill-simplex search for the minimal critical visibility over angles");

  m.def(
      "export_mps",
      [](const PureState& state, const ExperimentConfig& config, const AngleVector& angles,
         const std::string& path) {
        const ProbabilityTable table = probability_table(state, config, angles);
        write_mps(build_lp(config, table), path);
      },
      py::arg("state"), py::arg("config"), py::arg("angles"), py::arg("path"),
      "Write the LP for these angles as a fixed-format MPS file");

  m.def(
      "lp_index_bytes",
      [](const PureState& state, const ExperimentConfig& config, const AngleVector& angles) {
        const ProbabilityTable table = probability_table(state, config, angles);
        return build_lp(config, table).index_bytes();
      },
      py::arg("state"), py::arg("config"), py::arg("angles"),
      "Bytes of implicit index storage for the reduced LP");
}
