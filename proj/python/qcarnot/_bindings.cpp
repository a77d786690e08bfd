// Python bindings. Structured results (summaries, ledgers) cross the boundary
// as JSON text and are decoded on the Python side.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <span>
#include <sstream>

#include "qcarnot/core.hpp"
#include "qcarnot/cycle.hpp"
#include "qcarnot/presets.hpp"
#include "qcarnot/protocols.hpp"
#include "qcarnot/thermo.hpp"

namespace py = pybind11;
using namespace qcarnot;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict protocol_dict(const FrequencyProtocol& p) {
  const FrequencyProtocol g = p.kind() == FrequencyProtocol::Kind::Grid ? p : p.sampled(2001);
  std::vector<double> t(g.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g.time_at(i);
  py::dict d;
  d["t"] = to_array(t);
  d["omega"] = to_array(g.omega_samples());
  d["omega_dot"] = to_array(g.omega_dot_samples());
  return d;
}

std::string run_cycle_json(const CycleSpec& spec, double tol, std::size_t max_cycles) {
  LimitCycleOptions opt;
  opt.tol = tol;
  opt.max_cycles = max_cycles;
  CycleResult result;
  {
    py::gil_scoped_release release;
    result = run_to_limit_cycle(spec, opt);
  }
  nlohmann::json out = cycle_summary_json(result);
  out["ledger"] = ledger_json(analyze_cycle(result, spec));
  return out.dump();
}

std::string sweep_json(const CycleSpec& tmpl, const std::string& axis,
                       const std::vector<double>& values, std::size_t jobs) {
  SweepOptions opt;
  opt.jobs = jobs;
  const SweepAxis a = sweep_axis_from_string(axis);
  std::vector<SweepRow> rows;
  {
    py::gil_scoped_release release;
    rows = sweep(tmpl, a, values, opt);
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"value", r.value}, {"iterations", r.iterations}};
    if (r.ledger) row["ledger"] = ledger_json(*r.ledger);
    else row["error"] = r.error;
    out.push_back(row);
  }
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_qcarnot, m) {
  m.doc() = "Finite-time quantum Carnot engines on a harmonic oscillator";
  m.attr("__version__") = std::string(kVersion);
  m.attr("TIME_UNIT") = kTimeUnit;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InvalidProtocol>(m, "InvalidProtocol", base.ptr());
  py::register_exception<InfeasibleStroke>(m, "InfeasibleStroke", base.ptr());
  py::register_exception<ProtocolInversionFailure>(m, "ProtocolInversionFailure", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
  py::register_exception<TruncationError>(m, "TruncationError", base.ptr());

  py::class_<ObservableVector>(m, "ObservableVector")
      .def(py::init<>())
      .def(py::init([](double h, double l, double c) { return ObservableVector{h, l, c, 1.0}; }),
           py::arg("h"), py::arg("l") = 0.0, py::arg("c") = 0.0)
      .def_readwrite("h", &ObservableVector::h)
      .def_readwrite("l", &ObservableVector::l)
      .def_readwrite("c", &ObservableVector::c)
      .def("casimir", &ObservableVector::casimir)
      .def("is_physical", &ObservableVector::is_physical, py::arg("omega"), py::arg("tol") = 1e-9)
      .def("__repr__", [](const ObservableVector& v) {
        std::ostringstream os;
        os.precision(10);
        os << "ObservableVector(h=" << v.h << ", l=" << v.l << ", c=" << v.c << ")";
        return os.str();
      });

  py::class_<CycleSpec>(m, "CycleSpec")
      .def(py::init<>())
      .def_property(
          "kind", [](const CycleSpec& s) { return std::string(to_string(s.kind)); },
          [](CycleSpec& s, const std::string& k) { s.kind = cycle_kind_from_string(k); })
      .def_readwrite("omega1", &CycleSpec::omega1)
      .def_readwrite("omega2", &CycleSpec::omega2)
      .def_readwrite("omega3", &CycleSpec::omega3)
      .def_readwrite("omega4", &CycleSpec::omega4)
      .def_readwrite("t_hot_bath", &CycleSpec::t_hot_bath)
      .def_readwrite("t_cold_bath", &CycleSpec::t_cold_bath)
      .def_readwrite("coupling", &CycleSpec::coupling)
      .def_readwrite("open_stroke_duration", &CycleSpec::open_stroke_duration)
      .def_readwrite("adiabat_duration", &CycleSpec::adiabat_duration)
      .def_readwrite("t_hot_internal", &CycleSpec::t_hot_internal)
      .def_readwrite("t_cold_internal", &CycleSpec::t_cold_internal)
      .def_readwrite("mu_magnitude", &CycleSpec::mu_magnitude)
      .def_readwrite("gamma_d", &CycleSpec::gamma_d)
      .def("validate", &CycleSpec::validate, py::arg("strict_carnot") = true)
      .def("cycle_time", &CycleSpec::cycle_time)
      .def("with_cycle_time", &CycleSpec::with_cycle_time, py::arg("atomic_time"));

  m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("to_atomic_time", &to_atomic_time);
  m.def("to_reporting_time", &to_reporting_time);
  m.def("thermal_population", &thermal_population, py::arg("omega"), py::arg("temperature"));
  m.def("thermal_observable_vector", &thermal_observable_vector, py::arg("omega"),
        py::arg("temperature"));
  m.def("coherence", &coherence, py::arg("v"), py::arg("omega"));
  m.def("von_neumann_entropy", &von_neumann_entropy, py::arg("v"), py::arg("omega"));
  m.def(
      "ideal_carnot_work",
      [](const CycleSpec& s, double t_cold, double t_hot) {
        return ideal_carnot_work(geometry_of(s), t_cold, t_hot);
      },
      py::arg("spec"), py::arg("t_cold"), py::arg("t_hot"));

  m.def(
      "sta_protocol",
      [](double wi, double wf, double tf, std::size_t points) {
        return protocol_dict(build_sta_protocol(wi, wf, tf, points).protocol);
      },
      py::arg("omega_initial"), py::arg("omega_final"), py::arg("t_f"),
      py::arg("points") = kDefaultProtocolPoints);
  m.def(
      "ste_protocol",
      [](double wi, double wf, double tf, double temperature, double coupling,
         std::size_t points) {
        return protocol_dict(
            build_ste_protocol(wi, wf, tf, BathSpec{temperature, coupling}, points).protocol);
      },
      py::arg("omega_initial"), py::arg("omega_final"), py::arg("t_f"), py::arg("temperature"),
      py::arg("coupling") = 0.05, py::arg("points") = kDefaultProtocolPoints);
  m.def(
      "constant_mu_protocol",
      [](double wi, double wf, double mu) {
        return protocol_dict(build_constant_mu_protocol(wi, wf, mu));
      },
      py::arg("omega_initial"), py::arg("omega_final"), py::arg("mu"));

  m.def("_run_cycle_json", &run_cycle_json, py::arg("spec"), py::arg("tol") = 1e-9,
        py::arg("max_cycles") = 500);
  m.def("_sweep_json", &sweep_json, py::arg("spec"), py::arg("axis"), py::arg("values"),
        py::arg("jobs") = 1);
}
