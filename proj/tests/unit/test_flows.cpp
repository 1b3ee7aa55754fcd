#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scmcf/diagnostics.hpp"
#include "scmcf/error.hpp"
#include "scmcf/flows.hpp"
#include "scmcf/radial.hpp"

using namespace scmcf;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double mean_radius(const FlowState& s) {
  const auto pts = polyline::make_view(s.geometry).points;
  double sum = 0.0;
  for (const auto& p : pts) sum += norm(p);
  return sum / pts.size();
}

FlowState perturbed_circle(std::size_t n) {
  auto s = build_circle(1.0, n, 1.0, make_power_law(-1.0, 1.0));
  auto& c = s.concentration();
  for (std::size_t i = 0; i < n; ++i) c[i] = 1.0 + 0.3 * std::sin(2.0 * kPi * 3.0 * i / n);
  return s;
}

}  // namespace

TEST_CASE("cylinder plateau shrinks at unit speed") {
  const auto s0 = build_cylinder(1.0, 2.0, 64, 1.0, EnergyDensity::constant(1.0));
  for (double dt : {1e-3, 5e-4}) {
    const auto s1 = step(s0, dt);
    const auto& p = std::get<RevolutionProfile>(s1.geometry);
    for (double w : p.w) CHECK(std::abs(w - (1.0 - dt)) < 2.0 * dt * dt);
    CHECK(s1.time == Approx(dt));
    CHECK(s1.step_count == 1);
  }
}

TEST_CASE("inward circle shrinks at unit speed") {
  const auto s0 = build_circle(1.0, 256, 1.0, EnergyDensity::constant(1.0));
  const double dt = 1e-3;
  const auto s1 = step(s0, dt);
  CHECK(std::abs(mean_radius(s1) - (1.0 - dt)) < 2.0 * dt * dt);
}

TEST_CASE("zero step is the identity") {
  const auto s0 = perturbed_circle(64);
  const auto s1 = step(s0, 0.0);
  CHECK(std::get<CurveMesh>(s1.geometry).nodes == std::get<CurveMesh>(s0.geometry).nodes);
  CHECK(s1.concentration() == s0.concentration());
  CHECK(s1.time == s0.time);
}

TEST_CASE("steps above the stability bound are refused") {
  const auto s0 = build_circle(1.0, 128, 1.0, EnergyDensity::constant(1.0));
  const double bound = stable_step(s0);
  CHECK(bound == Approx(0.25 * 2.0 * std::sin(kPi / 128)).epsilon(1e-12));
  CHECK_THROWS_AS(step(s0, 2.0 * bound), StabilityError);
  CHECK_NOTHROW(step(s0, bound));
}

TEST_CASE("one hundred steps conserve mass and dissipate energy") {
  auto s = perturbed_circle(128);
  const double m0 = mass(s);
  double E = energy(s), A = area(s), cmin = min_concentration(s);
  for (int k = 0; k < 100; ++k) {
    s = step(s, 2e-3);
    CHECK(std::abs(mass(s) - m0) / m0 < 1e-12);
    CHECK(energy(s) <= E * (1.0 + 1e-10));
    CHECK(area(s) < A);
    CHECK(min_concentration(s) >= cmin - 1e-10);
    CHECK(min_mean_curvature(s) > 0.0);
    E = energy(s);
    A = area(s);
    cmin = min_concentration(s);
  }
}

TEST_CASE("remeshing keeps mass, anchors and the shape") {
  auto s = build_convexity_scenario({}, make_power_law(-1.0, 1.0));
  const auto& p0 = std::get<RevolutionProfile>(s.geometry);
  // Squeeze a few nodes together so the remesher has work to do.
  auto& p = std::get<RevolutionProfile>(s.geometry);
  p.x[400] = 0.5 * (p.x[399] + p.x[400]);
  p.w[400] = convexity_profile_radius({}, p.x[400]);
  const double m0 = mass(s);
  const double A0 = area(s);
  const auto r = remesh(s);
  const auto& q = std::get<RevolutionProfile>(r.geometry);
  CHECK(mass(r) == Approx(m0).epsilon(1e-12));
  CHECK(area(r) == Approx(A0).epsilon(1e-5));
  CHECK(q.x.front() == p0.x.front());
  CHECK(q.x.back() == p0.x.back());
  CHECK(q.w.front() == 0.0);
  CHECK(q.w.back() == 0.0);
  CHECK(mesh_quality_ratio(r) < 1.01);
}

TEST_CASE("convexity scenario initial data") {
  const ConvexityScenarioParams prm;
  const auto G = make_power_law(-1.0, 1.0);
  const auto s = build_convexity_scenario(prm, G);
  const auto& p = std::get<RevolutionProfile>(s.geometry);
  CHECK(p.size() == prm.N);
  CHECK(convexity_profile_radius(prm, prm.x[0] - 1.0) == 0.0);
  CHECK(p.x.front() == Approx(prm.x[0] - 1.0));
  for (double x = prm.x[0]; x <= prm.x[5]; x += 0.25) CHECK(convexity_profile_radius(prm, x) == 1.0);
  const double gI = G.scaling_factor(convexity_concentration(prm, 0.5 * (prm.x[2] + prm.x[3])));
  const double gO = G.scaling_factor(convexity_concentration(prm, 0.5 * (prm.x[4] + prm.x[5])));
  CHECK(gI > gO);
  CHECK(gI == Approx(2.0));
  CHECK(gO == Approx(1.0));
  CHECK(convexity_monitor(s, plateau_layout(prm)).convex);
  CHECK_THROWS_AS(build_convexity_scenario(prm, EnergyDensity::constant(1.0)), ParabolicityError);
  CHECK_THROWS_AS(build_convexity_scenario(prm, make_power_law(2.0, 0.0)), ParabolicityError);
}

TEST_CASE("self-intersection scenario initial data") {
  const SelfIntersectionScenarioParams prm;
  const auto G = make_power_law(-1.0, 1.0);
  const auto s = build_self_intersection_scenario(prm, G);
  const auto& m = std::get<CurveMesh>(s.geometry);
  const std::size_t zl = s.markers.at("z_l");
  const std::size_t zr = s.markers.at("z_r");
  const double off = prm.epsilon * prm.rho0;
  CHECK(m.nodes[zl].x == Approx(-off).epsilon(1e-12));
  CHECK(std::abs(m.nodes[zl].y) < 1e-12);
  CHECK(m.nodes[zr].x - m.nodes[zl].x == Approx(2.0 * off).epsilon(1e-12));
  const auto f = curve_geometry(m);
  CHECK(f.H[zl] == Approx(-1.0 / (prm.R + off)).epsilon(1e-3));
  CHECK(marker_height(s, "z_l") == Approx(off));
  CHECK(gap_function(s) == Approx(2.0 * off));
  CHECK_FALSE(detect_self_intersection(s));

  CHECK(self_intersection_K(prm, G) == Approx(1.0));
  CHECK(predicted_crossing_time(prm, G) == Approx(0.02));
  CHECK(minimal_horizon(prm, G) > predicted_crossing_time(prm, G));

  const Vec2 o = self_intersection_reference_point(prm, 0.25);
  CHECK(norm(o) < 1e-12);
  CHECK(norm(self_intersection_reference_point(prm, 0.75)) < 1e-12);

  SelfIntersectionScenarioParams big = prm;
  big.epsilon = 0.5;
  CHECK_THROWS_AS(build_self_intersection_scenario(big, G), EpsilonTooLarge);
}

TEST_CASE("circle run follows the closed-form radius") {
  RunOptions o;
  o.t_end = 0.3;
  o.dt = 2e-5;
  o.monitor_every = 1000;
  const auto res = run(build_circle(1.0, 128, 1.0, EnergyDensity::constant(1.0)), o);
  CHECK(res.final_state.time == Approx(0.3));
  const auto traj = radial::solve_radial(EnergyDensity::constant(1.0), 2.0 * kPi, 1, 1.0, 0.3, 0.3);
  CHECK(std::abs(mean_radius(res.final_state) - traj.points.back().R) < 1e-4);
  CHECK(res.events.empty());
  CHECK(res.series.rows.front().time == 0.0);
  CHECK(res.series.rows.back().time == Approx(0.3));
}

TEST_CASE("sphere run follows the closed-form radius") {
  RunOptions o;
  o.t_end = 0.1;
  o.dt = 2e-5;
  o.monitor_every = 1000;
  const auto res = run(build_sphere(1.0, 128, 1.0, EnergyDensity::constant(1.0)), o);
  CHECK(std::abs(mean_radius(res.final_state) - std::sqrt(1.0 - 0.4)) < 2e-4);
}

TEST_CASE("shrinking circle reports extinction") {
  RunOptions o;
  o.t_end = 1.0;
  o.dt = 1e-3;
  o.monitor_every = 100;
  const auto res = run(build_circle(1.0, 64, 1.0, EnergyDensity::constant(1.0)), o);
  REQUIRE_FALSE(res.events.empty());
  const auto& e = res.events.back();
  CHECK((e.type == event_type::kExtinction || e.type == event_type::kPinchOff));
  CHECK(e.t_event == Approx(0.5).epsilon(1e-2));
  CHECK(res.final_state.time < 0.51);
}

TEST_CASE("convexity loss is detected") {
  const ConvexityScenarioParams prm;
  RunOptions o;
  o.t_end = 2e-3;
  o.dt = 2e-4;
  o.detect_convexity = true;
  o.plateaus = plateau_layout(prm);
  o.stop_on = {event_type::kConvexityLost};
  const auto res = run(build_convexity_scenario(prm, make_power_law(-1.0, 1.0)), o);
  REQUIRE(res.events.size() == 1);
  CHECK(res.events[0].type == event_type::kConvexityLost);
  CHECK(res.events[0].t_event > 0.0);
  CHECK(res.events[0].payload.at("gap") >= kConvexityEventThreshold * 0.999);
}

TEST_CASE("after_step hook may alter the state") {
  RunOptions o;
  o.t_end = 0.01;
  o.dt = 1e-3;
  o.after_step = [](FlowState& s) {
    if (s.step_count == 3)
      for (double& c : s.concentration()) c *= 1.5;
  };
  const auto res = run(build_circle(1.0, 64, 1.0, make_power_law(-1.0, 1.0)), o);
  CHECK(res.series.rows.back().mass == Approx(1.5 * res.series.rows.front().mass).epsilon(1e-10));
}
