#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "scmcf/cli.hpp"
#include "scmcf/error.hpp"
#include "scmcf/radial.hpp"

namespace py = pybind11;
using namespace scmcf;

namespace {

py::dict row_dict(const DiagnosticsRow& r) {
  py::dict d;
  d["time"] = r.time;
  d["mass"] = r.mass;
  d["energy"] = r.energy;
  d["area"] = r.area;
  d["min_H"] = r.min_H;
  d["max_H"] = r.max_H;
  d["min_c"] = r.min_c;
  d["dissipation_lhs"] = r.dissipation_lhs;
  d["dissipation_rhs"] = r.dissipation_rhs;
  d["remeshes"] = r.remeshes;
  d["events"] = r.events;
  return d;
}

std::vector<std::array<double, 2>> points(const FlowState& s) {
  std::vector<std::array<double, 2>> out;
  for (const auto& p : polyline::make_view(s.geometry).points) out.push_back({p.x, p.y});
  return out;
}

}  // namespace

PYBIND11_MODULE(_scmcf, m) {
  m.doc() = "Scaled mean curvature flow with surface diffusion";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<ParabolicityError>(m, "ParabolicityError", base.ptr());
  py::register_exception<MeshQualityError>(m, "MeshQualityError", base.ptr());
  py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
  py::register_exception<EpsilonTooLarge>(m, "EpsilonTooLarge", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<EnergyDensity>(m, "EnergyDensity")
      .def_static("power_law", &make_power_law, py::arg("s"), py::arg("alpha") = 0.0)
      .def_static("constant", &EnergyDensity::constant, py::arg("value"))
      .def("evaluate", &EnergyDensity::evaluate, py::arg("c"), py::arg("order") = 0)
      .def("g", &EnergyDensity::scaling_factor, py::arg("c"), py::arg("order") = 0)
      .def_property_readonly("valid_range",
                             [](const EnergyDensity& d) { return std::make_pair(d.valid_range().lo, d.valid_range().hi); })
      .def("__repr__", &EnergyDensity::describe);

  py::class_<ParabolicityReport>(m, "ParabolicityReport")
      .def_readonly("g_positive", &ParabolicityReport::g_positive)
      .def_readonly("G_second_positive", &ParabolicityReport::G_second_positive)
      .def_readonly("min_g", &ParabolicityReport::min_g)
      .def_readonly("min_G_second", &ParabolicityReport::min_G_second)
      .def_readonly("samples", &ParabolicityReport::samples);
  m.def(
      "check_parabolicity",
      [](const EnergyDensity& d, double lo, double hi, int n) { return check_parabolicity(d, Interval{lo, hi}, n); },
      py::arg("density"), py::arg("lo"), py::arg("hi"), py::arg("n") = 100);

  auto radial = m.def_submodule("radial", "Radially symmetric reduction");
  radial.def("unit_sphere_area", &radial::unit_sphere_area);
  radial.def("concentration", &radial::radial_concentration, py::arg("m"), py::arg("d"), py::arg("R"));
  radial.def("rhs", &radial::radial_rhs, py::arg("density"), py::arg("m"), py::arg("d"), py::arg("R"));
  radial.def(
      "separation_oracle",
      [](const EnergyDensity& g, double mass, int d, double R0, double R) {
        return radial::separation_oracle(g, mass, d, R0, R);
      },
      py::arg("density"), py::arg("m"), py::arg("d"), py::arg("R0"), py::arg("R"));
  radial.def(
      "extinction_time",
      [](const EnergyDensity& g, double mass, int d, double R0) -> py::object {
        const auto r = radial::extinction_time(g, mass, d, R0);
        if (!r.finite()) return py::none();
        return py::float_(r.T);
      },
      py::arg("density"), py::arg("m"), py::arg("d"), py::arg("R0"),
      "Extinction time, or None when the lifetime is infinite.");
  radial.def(
      "solve",
      [](const EnergyDensity& g, double mass, int d, double R0, double t_end, double dt) {
        const auto traj = radial::solve_radial(g, mass, d, R0, t_end, dt);
        std::vector<double> t, R;
        for (const auto& p : traj.points) {
          t.push_back(p.t);
          R.push_back(p.R);
        }
        return py::make_tuple(t, R, traj.extinction_time);
      },
      py::arg("density"), py::arg("m"), py::arg("d"), py::arg("R0"), py::arg("t_end"), py::arg("dt"),
      "Returns (t, R, extinction_time or None).");

  py::class_<FlowState>(m, "FlowState")
      .def_readonly("time", &FlowState::time)
      .def_readonly("step_count", &FlowState::step_count)
      .def_readonly("markers", &FlowState::markers)
      .def_property_readonly("is_curve", &FlowState::is_curve)
      .def_property_readonly("points", &points)
      .def_property_readonly("concentration", [](const FlowState& s) { return s.concentration(); })
      .def_property_readonly("H", [](const FlowState& s) { return geometry_fields(s.geometry).H; })
      .def("__len__", &FlowState::size);

  m.def("build_circle", [](double R, std::size_t N, double c, const EnergyDensity& d, bool inward) {
    return build_circle(R, N, c, d, inward ? Orientation::NormalLeftOfTangent : Orientation::NormalRightOfTangent);
  }, py::arg("R"), py::arg("N"), py::arg("c"), py::arg("density"), py::arg("inward") = true);
  m.def("build_sphere", &build_sphere, py::arg("R"), py::arg("N"), py::arg("c"), py::arg("density"));
  m.def("build_cylinder", &build_cylinder, py::arg("radius"), py::arg("length"), py::arg("N"), py::arg("c"),
        py::arg("density"));
  m.def(
      "build_convexity_scenario",
      [](const EnergyDensity& d, std::size_t N) {
        ConvexityScenarioParams p;
        p.N = N;
        return build_convexity_scenario(p, d);
      },
      py::arg("density"), py::arg("N") = 800);
  m.def(
      "build_self_intersection_scenario",
      [](const EnergyDensity& d, double epsilon, std::size_t N) {
        SelfIntersectionScenarioParams p;
        p.epsilon = epsilon;
        p.N = N;
        return build_self_intersection_scenario(p, d);
      },
      py::arg("density"), py::arg("epsilon") = 0.01, py::arg("N") = 2048);

  m.def("step", [](const FlowState& s, double dt) { return step(s, dt); }, py::arg("state"), py::arg("dt"));
  m.def("stable_step", [](const FlowState& s) { return stable_step(s); });
  m.def("mass", &mass);
  m.def("energy", &energy);
  m.def("area", [](const FlowState& s) { return area(s); });
  m.def("gap_function", &gap_function);

  m.def(
      "run",
      [](const FlowState& s, double t_end, double dt, int monitor_every, bool detect_convexity,
         bool detect_self_intersection, std::vector<std::string> stop_on) {
        RunOptions o;
        o.t_end = t_end;
        o.dt = dt;
        o.monitor_every = monitor_every;
        o.detect_convexity = detect_convexity;
        if (detect_convexity) o.plateaus = plateau_layout(ConvexityScenarioParams{});
        o.detect_self_intersection = detect_self_intersection;
        o.stop_on = {stop_on.begin(), stop_on.end()};
        RunResult res;
        {
          py::gil_scoped_release release;
          res = run(s, o);
        }
        py::list rows;
        for (const auto& r : res.series.rows) rows.append(row_dict(r));
        py::list events;
        for (const auto& e : res.events) {
          py::dict d;
          d["type"] = e.type;
          d["t_event"] = e.t_event;
          d["payload"] = e.payload;
          events.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["events"] = events;
        out["final_state"] = res.final_state;
        out["remesh_count"] = res.remesh_count;
        out["dissipation_residual"] =
            res.series.rows.size() >= 3 ? py::cast(dissipation_residual(res.series.rows)) : py::none();
        return out;
      },
      py::arg("state"), py::arg("t_end"), py::arg("dt"), py::arg("monitor_every") = 1,
      py::arg("detect_convexity") = false, py::arg("detect_self_intersection") = false,
      py::arg("stop_on") = std::vector<std::string>{},
      "Run the flow; returns a dict with rows, events, final_state, remesh_count and dissipation_residual.");

  m.def(
      "run_config",
      [](const std::filesystem::path& path, std::optional<std::filesystem::path> out, bool quiet) {
        py::gil_scoped_release release;
        return cli::run_config(path, out, quiet);
      },
      py::arg("path"), py::arg("out") = std::nullopt, py::arg("quiet") = true,
      "Run a JSON scenario config; returns the process exit code (0, 1 or 2).");
}
