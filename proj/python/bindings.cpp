#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpw/app/config.hpp"
#include "lpw/app/experiments.hpp"
#include "lpw/bell_harness.hpp"
#include "lpw/singlet_oracle.hpp"

namespace py = pybind11;
using namespace lpw;

namespace {

// JSON crosses the boundary as text; the stdlib json module does the rest.
py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::string from_python(const py::object& o) {
  if (o.is_none()) return "{}";
  return py::module_::import("json").attr("dumps")(o).cast<std::string>();
}

ChshForm form_from_string(const std::string& name) {
  if (name == "split") return ChshForm::SplitAbsolute;
  if (name == "single") return ChshForm::SingleAbsolute;
  throw py::value_error("form must be \"split\" or \"single\"");
}

app::RunConfig load(const std::string& experiment, const py::object& config) {
  return app::parse_config(from_python(config), app::experiment_from_string(experiment));
}

}  // namespace

PYBIND11_MODULE(lpwlab, m) {
  m.doc() = "Pilot-wave and lattice pilot-wave Bell experiments";
  m.attr("__version__") = LPW_VERSION;

  py::register_exception<app::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "quantum_correlation", [](double theta) { return quantum_correlation(Angle(theta)); }, py::arg("theta"),
      "Singlet spin correlation at relative angle theta (radians).");
  m.def(
      "joint_probability", [](int a, int b, double theta) { return joint_probability(a, b, Angle(theta)); },
      py::arg("a"), py::arg("b"), py::arg("theta"));
  m.def(
      "chsh_value",
      [](std::array<double, 4> e, const std::string& form) {
        return chsh_value({e[0], e[1], e[2], e[3]}, form_from_string(form));
      },
      py::arg("correlators"), py::arg("form") = "split",
      "CHSH combination of (E_ab, E_ab', E_a'b, E_a'b').");
  m.def("standard_chsh_angles", [] {
    const ChshQuad q = standard_chsh_angles();
    return std::array<double, 4>{q.a.radians(), q.a_prime.radians(), q.b.radians(), q.b_prime.radians()};
  });
  m.def(
      "lhv_max", [](const std::string& form) { return brute_force_lhv_max(form_from_string(form)).value; },
      py::arg("form") = "split", "Maximum CHSH value over deterministic local strategies.");
  m.def("pi_digits", &pi_digits, py::arg("count"));

  m.def("experiments", [] {
    std::vector<std::string> names;
    for (auto k : app::all_experiments()) names.push_back(app::to_string(k));
    return names;
  });
  m.def(
      "default_config",
      [](const std::string& experiment) {
        return to_python(app::echo(app::default_config(app::experiment_from_string(experiment))));
      },
      py::arg("experiment"));
  m.def(
      "run",
      [](const std::string& experiment, const py::object& config) {
        const app::RunConfig c = load(experiment, config);
        app::ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = app::run_experiment(c);
        }
        py::dict out;
        out["report"] = to_python(r.report);
        py::dict files;
        for (const auto& a : r.artifacts) files[py::str(a.name)] = py::bytes(a.content);
        out["artifacts"] = files;
        out["flagged_runs"] = r.flagged_runs;
        return out;
      },
      py::arg("experiment"), py::arg("config") = py::none(),
      "Runs an experiment in memory. Returns the report and artifact bytes.");
  m.def(
      "execute",
      [](const std::string& experiment, const py::object& config) {
        const app::RunConfig c = load(experiment, config);
        app::ExecutionSummary s;
        {
          py::gil_scoped_release release;
          s = app::execute(c);
        }
        return to_python(s.manifest);
      },
      py::arg("experiment"), py::arg("config") = py::none(),
      "Runs an experiment, writes its artifacts and returns the manifest.");
}
