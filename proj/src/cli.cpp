#include "scmcf/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "scmcf/error.hpp"
#include "scmcf/radial.hpp"

namespace scmcf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Radial:
      return "radial";
    case Scenario::Convexity:
      return "convexity";
    case Scenario::SelfIntersection:
      return "self_intersection";
    case Scenario::CustomCurve:
      return "custom_curve";
    case Scenario::CustomRevolution:
      return "custom_revolution";
  }
  return "unknown";
}

namespace {

Scenario scenario_from(const std::string& name) {
  for (auto s : {Scenario::Radial, Scenario::Convexity, Scenario::SelfIntersection, Scenario::CustomCurve,
                 Scenario::CustomRevolution}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

const std::vector<std::string>& known_events() {
  static const std::vector<std::string> names{event_type::kConvexityLost, event_type::kSelfIntersection,
                                              event_type::kExtinction, event_type::kPinchOff,
                                              event_type::kDomainViolation};
  return names;
}

bool same_kind(const json& a, const json& b) {
  if (a.is_null() || b.is_null()) return true;
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

/// Overlays `user` on `defaults`, rejecting keys the defaults do not know about.
json overlay(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where + ": expected an object");
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown key '" + path + "'");
    const json& def = defaults.at(key);
    if (def.is_object() && !def.empty()) {
      out[key] = overlay(def, value, path);
    } else if (!same_kind(def, value)) {
      throw ConfigError("key '" + path + "' has the wrong type");
    } else {
      out[key] = value;
    }
  }
  return out;
}

template <class T>
T read(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

double positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
  return v;
}

EnergyDensity parse_density(const json& j) {
  if (!j.is_object()) throw ConfigError("density: expected an object");
  const std::string kind = read<std::string>(j, "kind", "density");
  if (kind == "power_law") {
    for (const auto& [k, v] : j.items()) {
      if (k != "kind" && k != "s" && k != "alpha") throw ConfigError("unknown key 'density." + k + "'");
    }
    return make_power_law(read<double>(j, "s", "density"), j.contains("alpha") ? read<double>(j, "alpha", "density") : 0.0);
  }
  if (kind == "constant") {
    for (const auto& [k, v] : j.items()) {
      if (k != "kind" && k != "value") throw ConfigError("unknown key 'density." + k + "'");
    }
    return EnergyDensity::constant(read<double>(j, "value", "density"));
  }
  throw ConfigError("density.kind must be 'power_law' or 'constant', got '" + kind + "'");
}

json density_json(const EnergyDensity& d) {
  if (const auto* p = std::get_if<PowerLaw>(&d.kind())) return {{"kind", "power_law"}, {"s", p->s}, {"alpha", p->alpha}};
  if (const auto* c = std::get_if<ConstantDensity>(&d.kind())) return {{"kind", "constant"}, {"value", c->value}};
  return {{"kind", d.describe()}};
}

}  // namespace

json default_config(Scenario scenario) {
  json j;
  j["scenario"] = to_string(scenario);
  j["density"] = {{"kind", "power_law"}, {"s", -1.0}, {"alpha", 1.0}};
  j["t_end"] = 0.1;
  j["dt"] = 1e-3;
  j["monitor_every"] = 10;
  j["snapshots"] = true;
  j["output_dir"] = "scmcf_out";
  const StepperSettings st;
  j["stepper"] = {{"stability_constant", st.stability_constant},
                  {"remesh_ratio", st.remesh_ratio},
                  {"picard_iterations", st.picard_iterations}};
  const Tolerances tol;
  j["tolerances"] = {{"mass_drift", tol.mass_drift},
                     {"energy_increase", tol.energy_increase},
                     {"min_c_decrease", tol.min_c_decrease},
                     {"dissipation_residual", tol.dissipation_residual},
                     {"radial_oracle", tol.radial_oracle},
                     {"mean_convexity", tol.mean_convexity}};
  j["stop_on"] = json::array();
  j["test_hooks"] = {{"mass_perturbation", 0.0}, {"perturb_at_step", 1}};

  switch (scenario) {
    case Scenario::Radial: {
      const RadialParams p;
      j["density"] = {{"kind", "constant"}, {"value", 1.0}};
      j["t_end"] = 0.3;
      j["dt"] = 5e-5;
      j["monitor_every"] = 200;
      j["radial"] = {{"d", p.d}, {"R0", p.R0}, {"mass", nullptr}, {"N", p.N}};
      break;
    }
    case Scenario::Convexity: {
      const ConvexityScenarioParams p;
      j["t_end"] = 0.05;
      j["dt"] = 2e-4;
      j["monitor_every"] = 1;
      j["convexity"] = {{"x", p.x}, {"c_inner", p.c_inner}, {"c_outer", p.c_outer}, {"N", p.N}};
      break;
    }
    case Scenario::SelfIntersection: {
      const SelfIntersectionScenarioParams p;
      j["t_end"] = 0.1;
      j["dt"] = 1e-4;
      j["monitor_every"] = 10;
      j["stop_on"] = {event_type::kSelfIntersection};
      j["self_intersection"] = {{"R", p.R},
                                {"epsilon", p.epsilon},
                                {"rho0", p.rho0},
                                {"delta", p.delta},
                                {"delta0", p.delta0},
                                {"split_amplitude", p.split_amplitude},
                                {"c_mean", p.c_mean},
                                {"c_amplitude", p.c_amplitude},
                                {"N", p.N}};
      break;
    }
    case Scenario::CustomCurve:
      j["custom_curve"] = {{"nodes", json::array()}, {"concentration", json::array()}, {"orientation", "left"}};
      break;
    case Scenario::CustomRevolution:
      j["custom_revolution"] = {{"x", json::array()},
                                {"w", json::array()},
                                {"concentration", json::array()},
                                {"closure", "capped"},
                                {"period", 0.0}};
      break;
  }
  return j;
}

RunConfig parse_config(const json& user) {
  if (!user.is_object()) throw ConfigError("config: top level must be an object");
  if (!user.contains("scenario")) throw ConfigError("config: missing 'scenario'");
  const Scenario scenario = scenario_from(read<std::string>(user, "scenario", "config"));

  json defaults = default_config(scenario);
  // The density is a tagged union; it is validated separately.
  json user_rest = user;
  json density = user_rest.contains("density") ? user_rest["density"] : defaults["density"];
  user_rest.erase("density");
  defaults.erase("density");
  const json j = overlay(defaults, user_rest, "");

  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.density = parse_density(density);
  cfg.t_end = positive(read<double>(j, "t_end", "config"), "t_end");
  cfg.dt = positive(read<double>(j, "dt", "config"), "dt");
  cfg.monitor_every = read<int>(j, "monitor_every", "config");
  if (cfg.monitor_every < 1) throw ConfigError("monitor_every must be >= 1");
  cfg.snapshots = read<bool>(j, "snapshots", "config");
  cfg.output_dir = read<std::string>(j, "output_dir", "config");

  const json& st = j["stepper"];
  cfg.stepper.stability_constant = positive(read<double>(st, "stability_constant", "stepper"), "stepper.stability_constant");
  cfg.stepper.remesh_ratio = read<double>(st, "remesh_ratio", "stepper");
  if (!(cfg.stepper.remesh_ratio > 1.0)) throw ConfigError("stepper.remesh_ratio must exceed 1");
  cfg.stepper.picard_iterations = read<int>(st, "picard_iterations", "stepper");
  if (cfg.stepper.picard_iterations < 1) throw ConfigError("stepper.picard_iterations must be >= 1");

  const json& tol = j["tolerances"];
  auto& T = cfg.tolerances;
  T.mass_drift = positive(read<double>(tol, "mass_drift", "tolerances"), "tolerances.mass_drift");
  T.energy_increase = positive(read<double>(tol, "energy_increase", "tolerances"), "tolerances.energy_increase");
  T.min_c_decrease = positive(read<double>(tol, "min_c_decrease", "tolerances"), "tolerances.min_c_decrease");
  T.dissipation_residual =
      positive(read<double>(tol, "dissipation_residual", "tolerances"), "tolerances.dissipation_residual");
  T.radial_oracle = positive(read<double>(tol, "radial_oracle", "tolerances"), "tolerances.radial_oracle");
  T.mean_convexity = positive(read<double>(tol, "mean_convexity", "tolerances"), "tolerances.mean_convexity");

  for (const auto& e : j["stop_on"]) {
    if (!e.is_string()) throw ConfigError("stop_on entries must be strings");
    const auto name = e.get<std::string>();
    if (std::find(known_events().begin(), known_events().end(), name) == known_events().end()) {
      throw ConfigError("stop_on: unknown event '" + name + "'");
    }
    cfg.stop_on.push_back(name);
  }

  const json& hooks = j["test_hooks"];
  cfg.hooks.mass_perturbation = read<double>(hooks, "mass_perturbation", "test_hooks");
  cfg.hooks.perturb_at_step = read<long>(hooks, "perturb_at_step", "test_hooks");

  const std::string section = to_string(scenario);
  const json& s = j[section];
  switch (scenario) {
    case Scenario::Radial: {
      RadialParams p;
      p.d = read<int>(s, "d", section);
      if (p.d != 1 && p.d != 2) throw ConfigError("radial.d must be 1 (circle) or 2 (sphere)");
      p.R0 = positive(read<double>(s, "R0", section), "radial.R0");
      if (!s["mass"].is_null()) p.mass = positive(read<double>(s, "mass", section), "radial.mass");
      p.N = read<std::size_t>(s, "N", section);
      cfg.params = p;
      break;
    }
    case Scenario::Convexity: {
      ConvexityScenarioParams p;
      const auto x = read<std::vector<double>>(s, "x", section);
      if (x.size() != 6) throw ConfigError("convexity.x must list six values x0..x5");
      std::copy(x.begin(), x.end(), p.x.begin());
      p.c_inner = read<double>(s, "c_inner", section);
      p.c_outer = read<double>(s, "c_outer", section);
      p.N = read<std::size_t>(s, "N", section);
      cfg.params = p;
      break;
    }
    case Scenario::SelfIntersection: {
      SelfIntersectionScenarioParams p;
      p.R = read<double>(s, "R", section);
      p.epsilon = read<double>(s, "epsilon", section);
      p.rho0 = read<double>(s, "rho0", section);
      p.delta = read<double>(s, "delta", section);
      p.delta0 = read<double>(s, "delta0", section);
      p.split_amplitude = read<double>(s, "split_amplitude", section);
      p.c_mean = read<double>(s, "c_mean", section);
      p.c_amplitude = read<double>(s, "c_amplitude", section);
      p.N = read<std::size_t>(s, "N", section);
      cfg.params = p;
      break;
    }
    case Scenario::CustomCurve: {
      CustomCurveParams p;
      for (const auto& xy : s["nodes"]) {
        if (!xy.is_array() || xy.size() != 2) throw ConfigError("custom_curve.nodes entries must be [x, y]");
        p.nodes.push_back({xy[0].get<double>(), xy[1].get<double>()});
      }
      p.concentration = read<std::vector<double>>(s, "concentration", section);
      const auto o = read<std::string>(s, "orientation", section);
      if (o != "left" && o != "right") throw ConfigError("custom_curve.orientation must be 'left' or 'right'");
      p.orientation = o == "left" ? Orientation::NormalLeftOfTangent : Orientation::NormalRightOfTangent;
      cfg.params = p;
      break;
    }
    case Scenario::CustomRevolution: {
      CustomRevolutionParams p;
      p.x = read<std::vector<double>>(s, "x", section);
      p.w = read<std::vector<double>>(s, "w", section);
      p.concentration = read<std::vector<double>>(s, "concentration", section);
      const auto c = read<std::string>(s, "closure", section);
      if (c != "capped" && c != "periodic") throw ConfigError("custom_revolution.closure must be 'capped' or 'periodic'");
      p.closure = c == "capped" ? Closure::CappedEnds : Closure::Periodic;
      p.period = read<double>(s, "period", section);
      cfg.params = p;
      break;
    }
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

namespace {

void require_config_parabolic(const FlowState& s) {
  const auto& c = s.concentration();
  const auto [lo_it, hi_it] = std::minmax_element(c.begin(), c.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) hi = lo * (1.0 + 1e-6) + 1e-12;
  const auto rep = check_parabolicity(s.density, Interval{lo, hi}, 100);
  if (!rep.g_positive || rep.min_G_second < 0.0) {
    std::ostringstream os;
    os << "parabolicity violation for " << s.density.describe() << " on [" << lo << ", " << hi
       << "]: min g = " << rep.min_g << ", min G'' = " << rep.min_G_second;
    throw ParabolicityError(os.str());
  }
}

double mean_radius(const FlowState& s) {
  const auto pts = polyline::make_view(s.geometry).points;
  double sum = 0.0;
  for (const auto& p : pts) sum += norm(p);
  return sum / static_cast<double>(pts.size());
}

void write_snapshot(const fs::path& file, const FlowState& s) {
  const auto f = geometry_fields(s.geometry);
  const auto V = normal_velocity(s);
  const auto pts = polyline::make_view(s.geometry).points;
  const auto& c = s.concentration();
  std::FILE* fp = std::fopen(file.string().c_str(), "w");
  if (!fp) throw Error("cannot write snapshot '" + file.string() + "'");
  std::fprintf(fp, "%s\n", s.is_curve() ? "index,x,y,c,H,V" : "index,x,w,c,H,V");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::fprintf(fp, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, pts[i].x, pts[i].y, c[i], f.H[i], V[i]);
  }
  std::fclose(fp);
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write '" + file.string() + "'");
  out << text;
}

json events_json(const std::vector<Event>& events) {
  json arr = json::array();
  for (const auto& e : events) {
    json payload = json::object();
    for (const auto& [k, v] : e.payload) payload[k] = v;
    arr.push_back({{"type", e.type}, {"t_event", e.t_event}, {"payload", payload}});
  }
  return arr;
}

std::vector<InvariantResult> check_invariants(const RunConfig& cfg, const RunResult& res) {
  const auto& rows = res.series.rows;
  const auto& T = cfg.tolerances;
  std::vector<InvariantResult> out;

  InvariantResult mass{"mass_conservation", true, 0.0, T.mass_drift};
  InvariantResult energy{"energy_nonincreasing", true, -std::numeric_limits<double>::infinity(), T.energy_increase};
  InvariantResult area{"area_decreasing", true, -std::numeric_limits<double>::infinity(), 0.0};
  InvariantResult positivity{"positivity", true, std::numeric_limits<double>::infinity(), 0.0};
  InvariantResult cmin{"min_concentration_nondecreasing", true, 0.0, T.min_c_decrease};
  const double m0 = rows.front().mass;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    mass.worst = std::max(mass.worst, std::abs(rows[k].mass - m0) / std::abs(m0));
    positivity.worst = std::min(positivity.worst, rows[k].min_c);
    if (k == 0) continue;
    energy.worst = std::max(energy.worst, (rows[k].energy - rows[k - 1].energy) / std::abs(rows[k - 1].energy));
    area.worst = std::max(area.worst, (rows[k].area - rows[k - 1].area) / rows[k - 1].area);
    cmin.worst = std::max(cmin.worst, (rows[k - 1].min_c - rows[k].min_c) / std::max(1.0, std::abs(rows[k - 1].min_c)));
  }
  if (rows.size() < 2) {
    energy.worst = 0.0;
    area.worst = -1.0;
  }
  mass.passed = mass.worst <= T.mass_drift;
  energy.passed = energy.worst <= T.energy_increase;
  area.passed = area.worst < 0.0;
  positivity.passed = positivity.worst > 0.0;
  cmin.passed = cmin.worst <= T.min_c_decrease;
  out.insert(out.end(), {mass, energy, area, positivity, cmin});

  if (res.initial.min_H >= 0.0) {
    InvariantResult mc{"mean_convexity", true, std::numeric_limits<double>::infinity(), T.mean_convexity};
    for (const auto& r : rows) mc.worst = std::min(mc.worst, r.min_H);
    mc.passed = mc.worst > -T.mean_convexity;
    out.push_back(mc);
  }
  if (rows.size() >= 3) {
    InvariantResult diss{"dissipation_residual", true, dissipation_residual(rows), T.dissipation_residual};
    diss.passed = diss.worst <= T.dissipation_residual;
    out.push_back(diss);
  }
  return out;
}

}  // namespace

FlowState initial_state(const RunConfig& cfg) {
  FlowState s;
  switch (cfg.scenario) {
    case Scenario::Radial: {
      const auto& p = std::get<RadialParams>(cfg.params);
      const double alpha = radial::unit_sphere_area(p.d);
      const double m = p.mass.value_or(alpha * std::pow(p.R0, p.d));
      const double c = radial::radial_concentration(m, p.d, p.R0);
      s = p.d == 1 ? build_circle(p.R0, p.N, c, cfg.density) : build_sphere(p.R0, p.N, c, cfg.density);
      break;
    }
    case Scenario::Convexity:
      s = build_convexity_scenario(std::get<ConvexityScenarioParams>(cfg.params), cfg.density);
      break;
    case Scenario::SelfIntersection:
      s = build_self_intersection_scenario(std::get<SelfIntersectionScenarioParams>(cfg.params), cfg.density);
      break;
    case Scenario::CustomCurve: {
      const auto& p = std::get<CustomCurveParams>(cfg.params);
      CurveMesh mesh;
      mesh.nodes = p.nodes;
      mesh.concentration = p.concentration;
      mesh.orientation = p.orientation;
      validate(mesh);
      s.geometry = std::move(mesh);
      s.density = cfg.density;
      break;
    }
    case Scenario::CustomRevolution: {
      const auto& p = std::get<CustomRevolutionParams>(cfg.params);
      RevolutionProfile prof;
      prof.x = p.x;
      prof.w = p.w;
      prof.concentration = p.concentration;
      prof.closure = p.closure;
      prof.period = p.period;
      validate(prof);
      const std::size_t n = prof.size();
      s.geometry = std::move(prof);
      s.density = cfg.density;
      if (p.closure == Closure::CappedEnds) s.anchors = {0, n - 1};
      break;
    }
  }
  for (double c : s.concentration()) {
    if (!s.density.valid_range().contains(c)) throw DomainError("initial concentration outside the valid range");
  }
  require_config_parabolic(s);
  return s;
}

Outcome execute(const RunConfig& cfg) {
  FlowState state = initial_state(cfg);

  fs::create_directories(cfg.output_dir);
  const fs::path snap_dir = cfg.output_dir / "snapshots";
  if (fs::exists(snap_dir)) {
    for (const auto& entry : fs::directory_iterator(snap_dir)) {
      if (entry.path().extension() == ".csv") fs::remove(entry.path());
    }
  }
  if (cfg.snapshots) fs::create_directories(snap_dir);

  RunOptions opts;
  opts.t_end = cfg.t_end;
  opts.dt = cfg.dt;
  opts.monitor_every = cfg.monitor_every;
  opts.stepper = cfg.stepper;
  opts.stop_on = {cfg.stop_on.begin(), cfg.stop_on.end()};
  if (cfg.scenario == Scenario::Convexity) {
    opts.detect_convexity = true;
    opts.plateaus = plateau_layout(std::get<ConvexityScenarioParams>(cfg.params));
  }
  if (cfg.scenario == Scenario::SelfIntersection) opts.detect_self_intersection = true;
  if (cfg.hooks.mass_perturbation != 0.0) {
    const double factor = 1.0 + cfg.hooks.mass_perturbation;
    const long at = cfg.hooks.perturb_at_step;
    opts.after_step = [factor, at](FlowState& s) {
      if (s.step_count != at) return;
      for (double& c : s.concentration()) c *= factor;
    };
  }
  int snapshot = 0;
  if (cfg.snapshots) {
    opts.on_row = [&](const FlowState& s, const DiagnosticsRow&) {
      char name[32];
      std::snprintf(name, sizeof name, "%04d.csv", snapshot++);
      write_snapshot(snap_dir / name, s);
    };
  }

  const RunResult res = run(std::move(state), opts);

  Outcome outcome;
  outcome.events = res.events;
  outcome.invariants = check_invariants(cfg, res);

  const FlowState& fin = res.final_state;
  const auto& last = res.series.rows.back();
  json fs_json = {{"time", fin.time},
                  {"step_count", fin.step_count},
                  {"nodes", fin.size()},
                  {"remesh_count", res.remesh_count},
                  {"mass", last.mass},
                  {"energy", last.energy},
                  {"area", last.area},
                  {"min_H", last.min_H},
                  {"max_H", last.max_H},
                  {"min_c", last.min_c}};

  if (cfg.scenario == Scenario::Radial) {
    const auto& p = std::get<RadialParams>(cfg.params);
    const double alpha = radial::unit_sphere_area(p.d);
    const double m = p.mass.value_or(alpha * std::pow(p.R0, p.d));
    const double R = mean_radius(fin);
    fs_json["R"] = R;
    InvariantResult oracle{"radial_oracle", true, 0.0, cfg.tolerances.radial_oracle};
    if (fin.time > 0.0) {
      const auto traj = radial::solve_radial(cfg.density, m, p.d, p.R0, fin.time, fin.time);
      if (!traj.extinction_time) {
        const double R_ref = traj.points.back().R;
        fs_json["R_oracle"] = R_ref;
        oracle.worst = std::abs(R - R_ref) / R_ref;
      }
    }
    oracle.passed = oracle.worst <= oracle.tolerance;
    outcome.invariants.push_back(oracle);
  }
  if (cfg.scenario == Scenario::Convexity) {
    const auto& p = std::get<ConvexityScenarioParams>(cfg.params);
    const auto rep = convexity_monitor(fin, plateau_layout(p));
    fs_json["convex"] = rep.convex;
    fs_json["gap"] = rep.witness ? rep.witness->gap : 0.0;
    fs_json["curvature_sign_changes"] = rep.curvature_sign_changes;
  }
  if (cfg.scenario == Scenario::SelfIntersection) {
    const auto& p = std::get<SelfIntersectionScenarioParams>(cfg.params);
    fs_json["gap"] = gap_function(fin);
    fs_json["rho_l"] = marker_height(fin, "z_l");
    fs_json["rho_r"] = marker_height(fin, "z_r");
    fs_json["T1_predicted"] = predicted_crossing_time(p, cfg.density);
    fs_json["T0"] = minimal_horizon(p, cfg.density);
  }
  outcome.final_state = fs_json;

  const bool domain_violation = std::any_of(res.events.begin(), res.events.end(),
                                            [](const Event& e) { return e.type == event_type::kDomainViolation; });
  const bool all_passed = std::all_of(outcome.invariants.begin(), outcome.invariants.end(),
                                      [](const InvariantResult& r) { return r.passed; });
  outcome.exit_code = domain_violation ? 1 : (all_passed ? 0 : 2);

  std::string csv = series_csv_header() + "\n";
  for (const auto& r : res.series.rows) csv += series_csv_row(r) + "\n";
  write_text(cfg.output_dir / "series.csv", csv);
  write_text(cfg.output_dir / "events.json", events_json(res.events).dump(2) + "\n");

  json inv = json::array();
  for (const auto& r : outcome.invariants) {
    inv.push_back({{"name", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"tolerance", r.tolerance}});
  }
  json summary = {{"scenario", to_string(cfg.scenario)},
                  {"density", density_json(cfg.density)},
                  {"exit_code", outcome.exit_code},
                  {"invariants", inv},
                  {"events", events_json(res.events)},
                  {"final_state", fs_json}};
  write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  return outcome;
}

int run_config(const fs::path& path, const std::optional<fs::path>& out_override, bool quiet) {
  try {
    RunConfig cfg = load_config(path);
    if (out_override) cfg.output_dir = *out_override;
    const Outcome out = execute(cfg);
    if (!quiet) {
      for (const auto& r : out.invariants) {
        std::printf("%-34s %s  worst=%.6g  tol=%.3g\n", r.name.c_str(), r.passed ? "ok  " : "FAIL", r.worst,
                    r.tolerance);
      }
      for (const auto& e : out.events) std::printf("event %-20s t=%.10g\n", e.type.c_str(), e.t_event);
      std::printf("outputs in %s (exit %d)\n", cfg.output_dir.string().c_str(), out.exit_code);
    }
    return out.exit_code;
  } catch (const Error& e) {
    std::fprintf(stderr, "scmcf: %s\n", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "scmcf: %s\n", e.what());
    return 1;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Scaled mean curvature flow with surface diffusion: scenario runner"};
  std::string config;
  std::string out;
  std::vector<std::string> sweep;
  bool quiet = false;
  long seed = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", config, "Scenario configuration (JSON)");
  app.add_flag("--quiet", quiet, "Only report errors");
  app.add_option("--seed", seed, "Reserved; runs are deterministic");
  app.add_option("--out", out, "Override the output directory");
  app.add_option("--sweep", sweep, "Run several configurations in parallel");
  app.add_option("--threads", threads, "Worker threads for --sweep")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (config.empty() == sweep.empty()) {
    std::fprintf(stderr, "scmcf: give exactly one of --config or --sweep\n");
    return 1;
  }
  if (!config.empty()) {
    return run_config(config, out.empty() ? std::nullopt : std::optional<fs::path>(out), quiet);
  }

  std::vector<int> codes(sweep.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sweep.size(); i = next++) {
      std::optional<fs::path> dir;
      if (!out.empty()) dir = fs::path(out) / fs::path(sweep[i]).stem();
      codes[i] = run_config(sweep[i], dir, true);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, sweep.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int worst = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (!quiet) std::printf("%s: exit %d\n", sweep[i].c_str(), codes[i]);
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

}  // namespace scmcf::cli
