#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scmcf/diagnostics.hpp"
#include "scmcf/state.hpp"

namespace scmcf {

struct StepperSettings {
  /// Stability bound dt <= stability_constant * (shortest segment).
  double stability_constant = 0.25;
  /// Remesh once longest / shortest segment exceeds this ratio.
  double remesh_ratio = 3.0;
  /// Fixed-point passes for the secant diffusion coefficient.
  int picard_iterations = 2;
};

// ---------------------------------------------------------------------------
// Initial data

/// Uniformly sampled circle of radius R centred at `center`, nodes counter-clockwise.
/// NormalLeftOfTangent then points inward (H = +1/R), NormalRightOfTangent outward.
FlowState build_circle(double R, std::size_t N, double concentration, const EnergyDensity& density,
                       Orientation orientation = Orientation::NormalLeftOfTangent,
                       Vec2 center = {0.0, 0.0});

/// Sphere of radius R as a capped profile over [-R, R], nodes uniform in polar angle.
FlowState build_sphere(double R, std::size_t N, double concentration, const EnergyDensity& density);

/// Periodic cylinder w = radius over one period [0, length), uniform in x.
FlowState build_cylinder(double radius, double length, std::size_t N, double concentration,
                         const EnergyDensity& density);

struct ConvexityScenarioParams {
  std::array<double, 6> x{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  double c_inner = 0.5;
  double c_outer = 1.0;
  std::size_t N = 800;
};

/// Convex body of revolution with super-ellipse caps
/// w = (1 - (x0 - x)^6)^(1/6) on [x0 - 1, x0] and (1 - (x - x5)^6)^(1/6) on [x5, x5 + 1],
/// w = 1 on [x0, x5]. Nodes are equidistributed in arc length. The concentration is c_outer
/// on [x0 - 1, x1] and [x4, x5 + 1], c_inner on [x2, x3], with quintic smoothstep blends.
FlowState build_convexity_scenario(const ConvexityScenarioParams& params, const EnergyDensity& density);

/// Plateau layout matching the scenario parameters, for convexity_monitor.
PlateauLayout plateau_layout(const ConvexityScenarioParams& params);

/// Profile radius w0(x) of the convexity scenario.
double convexity_profile_radius(const ConvexityScenarioParams& params, double x);
/// Initial concentration c0(x) of the convexity scenario.
double convexity_concentration(const ConvexityScenarioParams& params, double x);

struct SelfIntersectionScenarioParams {
  double R = 1.0;
  double epsilon = 0.01;
  double rho0 = 1.0;
  /// Half-angle of the doubled arc and of its coincident middle part.
  double delta = 1.5707963267948966 + 0.5;
  double delta0 = 1.5707963267948966;
  /// Separation amplitude of the two branches near the ends of the arc.
  double split_amplitude = 0.4;
  /// u0(u) = c_mean - c_amplitude * sin(2 pi u): c = c_mean - c_amplitude at z_l.
  double c_mean = 0.75;
  double c_amplitude = 0.25;
  /// Node count, a multiple of 4.
  std::size_t N = 2048;
};

/// Reference immersed curve p(u) = C + (R + A(theta) sin 2 pi u)(cos theta, sin theta),
/// theta(u) = pi + delta cos 2 pi u, C = (R, 0); both u = 1/4 (z_l) and u = 3/4 (z_r)
/// map to the origin with reference normals (-1, 0) and (+1, 0).
Vec2 self_intersection_reference_point(const SelfIntersectionScenarioParams& params, double u);

/// Initial curve p + epsilon rho0 nu_ref with markers "z_l" and "z_r" and the reference frame
/// stored on the mesh. Throws EpsilonTooLarge if the polygon is not embedded.
FlowState build_self_intersection_scenario(const SelfIntersectionScenarioParams& params,
                                           const EnergyDensity& density);

/// K = g(u0(z_l)) - g(u0(z_r)).
double self_intersection_K(const SelfIntersectionScenarioParams& params, const EnergyDensity& density);

/// First-order crossing time 2 epsilon rho0 R / K.
double predicted_crossing_time(const SelfIntersectionScenarioParams& params, const EnergyDensity& density);

/// Smallest horizon T0 compatible with the smallness condition
/// epsilon < T0 K R / (8 rho0 (R^2 + 2 g_r)).
double minimal_horizon(const SelfIntersectionScenarioParams& params, const EnergyDensity& density);

/// Height of the node at `marker` above its reference point along the reference normal.
double marker_height(const FlowState& state, const std::string& marker);

/// rho(z_l) + rho(z_r); negative once the branches have crossed.
double gap_function(const FlowState& state);

// ---------------------------------------------------------------------------
// Time stepping

/// Largest admissible step for the current mesh.
double stable_step(const FlowState& state, const StepperSettings& settings = {});

/// One semi-implicit step of V = g(c) H and the conservative concentration update.
/// Throws StabilityError above the bound, DegeneracyError / MeshQualityError on pinch-off
/// and DomainError if the concentration leaves the valid range.
FlowState step(const FlowState& state, double dt, const StepperSettings& settings = {});

/// Ratio of longest to shortest segment.
double mesh_quality_ratio(const FlowState& state);

/// Arc-length equidistribution keeping anchors fixed; concentration is re-interpolated
/// through the cumulative mass so total mass is unchanged.
FlowState remesh(const FlowState& state);

struct RunOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  /// Diagnostics row every this many steps (plus the initial and final state).
  int monitor_every = 1;
  StepperSettings stepper;
  /// Detectors to run after each step.
  bool detect_convexity = false;
  std::optional<PlateauLayout> plateaus;
  bool detect_self_intersection = false;
  /// Non-terminal events that should nevertheless stop the run.
  std::set<std::string> stop_on;
  /// Extinction once the area drops below this fraction of the initial one.
  double extinction_area_fraction = 1e-4;
  /// Called after each accepted step (after remeshing); may modify the state.
  std::function<void(FlowState&)> after_step;
  /// Called for every recorded diagnostics row together with its state.
  std::function<void(const FlowState&, const DiagnosticsRow&)> on_row;
};

struct RunResult {
  RunSeries series;
  FlowState final_state;
  std::vector<Event> events;
  long remesh_count = 0;
  /// Initial state's diagnostics, for invariant checks.
  DiagnosticsRow initial;
};

/// Steps from state.time to t_end. Steps are shortened to stay below the stability bound;
/// events are recorded once each, with the time refined by bisecting the step size.
RunResult run(FlowState state, const RunOptions& options);

}  // namespace scmcf
