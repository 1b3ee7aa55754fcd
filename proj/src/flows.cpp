#include "scmcf/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "scmcf/error.hpp"
#include "scmcf/tridiagonal.hpp"

namespace scmcf {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

void assign_points(Geometry& g, const std::vector<Vec2>& pts) {
  if (auto* m = std::get_if<CurveMesh>(&g)) {
    m->nodes = pts;
    return;
  }
  auto& p = std::get<RevolutionProfile>(g);
  p.x.resize(pts.size());
  p.w.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    p.x[i] = pts[i].x;
    p.w[i] = pts[i].y;
  }
  if (p.closure == Closure::CappedEnds) {
    p.w.front() = 0.0;
    p.w.back() = 0.0;
  }
}

double geometry_h_min(const Geometry& g) {
  return std::visit([](const auto& m) { return m.h_min; }, g);
}

std::vector<double> lumped_area(std::size_t n, const std::vector<polyline::Segment>& segs) {
  std::vector<double> a(n, 0.0);
  for (const auto& s : segs) {
    a[s.a] += s.measure_a;
    a[s.b] += s.measure_b;
  }
  return a;
}

/// (G'(b) - G'(a)) / (b - a), or G'' at the midpoint when a and b nearly coincide.
double secant_second_derivative(const EnergyDensity& G, double a, double b) {
  if (std::abs(b - a) <= 1e-7 * std::max(std::abs(a), std::abs(b))) return G.evaluate(0.5 * (a + b), 2);
  return (G.evaluate(b, 1) - G.evaluate(a, 1)) / (b - a);
}

void require_in_range(const EnergyDensity& G, const std::vector<double>& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || !G.valid_range().contains(c[i])) {
      std::ostringstream os;
      os.precision(17);
      os << "concentration " << c[i] << " at node " << i << " left the valid range";
      throw DomainError(os.str());
    }
  }
}

struct MinMax {
  double min = std::numeric_limits<double>::infinity();
  double max = 0.0;
};

MinMax segment_lengths(const Geometry& g) {
  MinMax mm;
  for (const auto& s : polyline::segments(polyline::make_view(g))) {
    mm.min = std::min(mm.min, s.length);
    mm.max = std::max(mm.max, s.length);
  }
  return mm;
}

/// Dense tabulation of a parametric curve for arc-length placement of nodes.
struct ArcTable {
  std::vector<double> param;
  std::vector<double> arc;

  template <class F>
  ArcTable(F&& point, double t0, double t1, std::size_t samples) {
    param.resize(samples + 1);
    arc.resize(samples + 1);
    Vec2 prev = point(t0);
    for (std::size_t k = 0; k <= samples; ++k) {
      const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(samples);
      const Vec2 p = point(t);
      param[k] = t;
      arc[k] = k == 0 ? 0.0 : arc[k - 1] + norm(p - prev);
      prev = p;
    }
  }

  [[nodiscard]] double length() const { return arc.back(); }

  [[nodiscard]] double param_at(double s) const {
    if (s <= 0.0) return param.front();
    if (s >= arc.back()) return param.back();
    const auto it = std::upper_bound(arc.begin(), arc.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - arc.begin());
    const double tau = (s - arc[k - 1]) / (arc[k] - arc[k - 1]);
    return param[k - 1] + tau * (param[k] - param[k - 1]);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Builders

FlowState build_circle(double R, std::size_t N, double concentration, const EnergyDensity& density,
                       Orientation orientation, Vec2 center) {
  if (!(R > 0.0)) throw InvalidArgument("build_circle: radius must be positive");
  if (N < kMinNodes) throw InvalidArgument("build_circle: needs at least 8 nodes");
  CurveMesh mesh;
  mesh.orientation = orientation;
  mesh.nodes.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double phi = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(N);
    mesh.nodes[i] = center + R * Vec2{std::cos(phi), std::sin(phi)};
  }
  mesh.concentration.assign(N, concentration);
  mesh.h_min = 2e-4 * R;
  validate(mesh);
  FlowState s;
  s.geometry = std::move(mesh);
  s.density = density;
  require_in_range(density, s.concentration());
  return s;
}

FlowState build_sphere(double R, std::size_t N, double concentration, const EnergyDensity& density) {
  if (!(R > 0.0)) throw InvalidArgument("build_sphere: radius must be positive");
  if (N < kMinNodes) throw InvalidArgument("build_sphere: needs at least 8 nodes");
  RevolutionProfile p;
  p.closure = Closure::CappedEnds;
  p.x.resize(N);
  p.w.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double phi = kPi - kPi * static_cast<double>(i) / static_cast<double>(N - 1);
    p.x[i] = R * std::cos(phi);
    p.w[i] = R * std::sin(phi);
  }
  p.x.front() = -R;
  p.x.back() = R;
  p.w.front() = 0.0;
  p.w.back() = 0.0;
  p.concentration.assign(N, concentration);
  p.h_min = 2e-4 * R;
  validate(p);
  FlowState s;
  s.geometry = std::move(p);
  s.density = density;
  s.anchors = {0, N - 1};
  require_in_range(density, s.concentration());
  return s;
}

FlowState build_cylinder(double radius, double length, std::size_t N, double concentration,
                         const EnergyDensity& density) {
  if (!(radius > 0.0) || !(length > 0.0)) throw InvalidArgument("build_cylinder: radius and length must be positive");
  if (N < kMinNodes) throw InvalidArgument("build_cylinder: needs at least 8 nodes");
  RevolutionProfile p;
  p.closure = Closure::Periodic;
  p.period = length;
  p.x.resize(N);
  p.w.assign(N, radius);
  for (std::size_t i = 0; i < N; ++i) p.x[i] = length * static_cast<double>(i) / static_cast<double>(N);
  p.concentration.assign(N, concentration);
  p.h_min = 1e-4 * length;
  validate(p);
  FlowState s;
  s.geometry = std::move(p);
  s.density = density;
  require_in_range(density, s.concentration());
  return s;
}

namespace {

void check_convexity_params(const ConvexityScenarioParams& q) {
  if (!(q.x[0] >= 1.0)) throw InvalidArgument("convexity scenario: x0 must be >= 1");
  for (std::size_t i = 0; i + 1 < q.x.size(); ++i) {
    if (!(q.x[i + 1] > q.x[i])) throw InvalidArgument("convexity scenario: x0..x5 must be increasing");
  }
  if (!(q.c_inner > 0.0) || !(q.c_inner < q.c_outer)) {
    throw InvalidArgument("convexity scenario: need 0 < c_inner < c_outer");
  }
  if (q.N < kMinNodes) throw InvalidArgument("convexity scenario: needs at least 8 nodes");
}

void require_parabolic(const EnergyDensity& density, double lo, double hi, const char* where) {
  const auto rep = check_parabolicity(density, Interval{lo, hi}, 100);
  if (!rep.g_positive || !rep.G_second_positive) {
    std::ostringstream os;
    os << where << ": parabolicity violated on [" << lo << ", " << hi << "] (min g = " << rep.min_g
       << ", min G'' = " << rep.min_G_second << ")";
    throw ParabolicityError(os.str());
  }
}

}  // namespace

double convexity_profile_radius(const ConvexityScenarioParams& q, double x) {
  const double x0 = q.x[0];
  const double x5 = q.x[5];
  if (x < x0 - 1.0 || x > x5 + 1.0) return 0.0;
  if (x < x0) return std::pow(std::max(0.0, 1.0 - std::pow(x0 - x, 6)), 1.0 / 6.0);
  if (x > x5) return std::pow(std::max(0.0, 1.0 - std::pow(x - x5, 6)), 1.0 / 6.0);
  return 1.0;
}

double convexity_concentration(const ConvexityScenarioParams& q, double x) {
  const auto& p = q.x;
  if (x <= p[1] || x >= p[4]) return q.c_outer;
  if (x >= p[2] && x <= p[3]) return q.c_inner;
  if (x < p[2]) return q.c_outer + (q.c_inner - q.c_outer) * smoothstep5((x - p[1]) / (p[2] - p[1]));
  return q.c_inner + (q.c_outer - q.c_inner) * smoothstep5((x - p[3]) / (p[4] - p[3]));
}

PlateauLayout plateau_layout(const ConvexityScenarioParams& q) {
  return PlateauLayout{q.x[0], q.x[1], q.x[2], q.x[3], q.x[4], q.x[5]};
}

FlowState build_convexity_scenario(const ConvexityScenarioParams& q, const EnergyDensity& density) {
  check_convexity_params(q);
  require_parabolic(density, q.c_inner, q.c_outer, "convexity scenario");
  const double x0 = q.x[0];
  const double x5 = q.x[5];

  // Parameter t in [0, 3]: left cap, plateau, right cap. The caps use the super-ellipse angle
  // phi with a quintic reparameterisation so that the tabulated arc length is smooth in t.
  auto point = [&](double t) -> Vec2 {
    if (t <= 1.0) {
      const double phi = 0.5 * kPi * smoothstep5(t);
      return {x0 - std::cbrt(std::cos(phi)), std::cbrt(std::sin(phi))};
    }
    if (t <= 2.0) return {x0 + (t - 1.0) * (x5 - x0), 1.0};
    const double phi = 0.5 * kPi * smoothstep5(3.0 - t);
    return {x5 + std::cbrt(std::cos(phi)), std::cbrt(std::sin(phi))};
  };
  const ArcTable table(point, 0.0, 3.0, 60000);

  RevolutionProfile p;
  p.closure = Closure::CappedEnds;
  p.x.resize(q.N);
  p.w.resize(q.N);
  p.concentration.resize(q.N);
  const double L = table.length();
  for (std::size_t i = 0; i < q.N; ++i) {
    const double s = L * static_cast<double>(i) / static_cast<double>(q.N - 1);
    const Vec2 pt = point(table.param_at(s));
    p.x[i] = pt.x;
    p.w[i] = pt.y;
  }
  p.x.front() = x0 - 1.0;
  p.x.back() = x5 + 1.0;
  p.w.front() = 0.0;
  p.w.back() = 0.0;
  for (std::size_t i = 0; i < q.N; ++i) p.concentration[i] = convexity_concentration(q, p.x[i]);
  p.h_min = 1e-4 * (x5 - x0 + 2.0);
  validate(p);

  FlowState s;
  s.geometry = std::move(p);
  s.density = density;
  s.anchors = {0, q.N - 1};
  require_in_range(density, s.concentration());
  return s;
}

namespace {

void check_self_intersection_params(const SelfIntersectionScenarioParams& q) {
  if (!(q.R > 0.0)) throw InvalidArgument("self-intersection scenario: R must be positive");
  if (!(q.epsilon > 0.0 && q.epsilon < 1.0)) throw InvalidArgument("self-intersection scenario: epsilon must lie in (0, 1)");
  if (!(q.rho0 > 0.0)) throw InvalidArgument("self-intersection scenario: rho0 must be positive");
  if (!(q.delta0 > 0.0 && q.delta0 < q.delta && q.delta < kPi)) {
    throw InvalidArgument("self-intersection scenario: need 0 < delta0 < delta < pi");
  }
  if (!(q.split_amplitude > 0.0 && q.split_amplitude < q.R)) {
    throw InvalidArgument("self-intersection scenario: split amplitude must lie in (0, R)");
  }
  if (q.N < kMinNodes || q.N % 4 != 0) throw InvalidArgument("self-intersection scenario: N must be a multiple of 4, >= 8");
}

struct SplitCurve {
  const SelfIntersectionScenarioParams& q;

  [[nodiscard]] double theta(double u) const { return kPi + q.delta * std::cos(2.0 * kPi * u); }

  /// A(theta) and dA/dtheta.
  [[nodiscard]] std::pair<double, double> amplitude(double th) const {
    const double span = q.delta - q.delta0;
    const double t = (std::abs(th - kPi) - q.delta0) / span;
    if (t <= 0.0) return {0.0, 0.0};
    const double a = q.split_amplitude * std::exp(1.0 - 1.0 / t);
    const double sign = th >= kPi ? 1.0 : -1.0;
    return {a, a / (t * t) * sign / span};
  }

  [[nodiscard]] Vec2 point(double u) const {
    const double th = theta(u);
    const double r = q.R + amplitude(th).first * std::sin(2.0 * kPi * u);
    return Vec2{q.R, 0.0} + r * Vec2{std::cos(th), std::sin(th)};
  }

  [[nodiscard]] Vec2 tangent(double u) const {
    const double w = 2.0 * kPi;
    const double th = theta(u);
    const double dth = -w * q.delta * std::sin(w * u);
    const auto [A, dA] = amplitude(th);
    const double r = q.R + A * std::sin(w * u);
    const double dr = dA * dth * std::sin(w * u) + A * w * std::cos(w * u);
    const Vec2 radial{std::cos(th), std::sin(th)};
    const Vec2 t = dr * radial + r * dth * perp_left(radial);
    return t / norm(t);
  }

  [[nodiscard]] Vec2 normal(double u) const { return perp_left(tangent(u)); }
};

}  // namespace

Vec2 self_intersection_reference_point(const SelfIntersectionScenarioParams& params, double u) {
  return SplitCurve{params}.point(u);
}

double self_intersection_K(const SelfIntersectionScenarioParams& q, const EnergyDensity& density) {
  return density.scaling_factor(q.c_mean - q.c_amplitude, 0) - density.scaling_factor(q.c_mean + q.c_amplitude, 0);
}

double predicted_crossing_time(const SelfIntersectionScenarioParams& q, const EnergyDensity& density) {
  return 2.0 * q.epsilon * q.rho0 * q.R / self_intersection_K(q, density);
}

double minimal_horizon(const SelfIntersectionScenarioParams& q, const EnergyDensity& density) {
  const double g_r = density.scaling_factor(q.c_mean + q.c_amplitude, 0);
  return 8.0 * q.epsilon * q.rho0 * (q.R * q.R + 2.0 * g_r) / (self_intersection_K(q, density) * q.R);
}

FlowState build_self_intersection_scenario(const SelfIntersectionScenarioParams& q, const EnergyDensity& density) {
  check_self_intersection_params(q);
  const double c_l = q.c_mean - q.c_amplitude;
  const double c_r = q.c_mean + q.c_amplitude;
  if (!(c_l > 0.0) || !(c_r > c_l)) throw InvalidArgument("self-intersection scenario: need 0 < c(z_l) < c(z_r)");
  require_parabolic(density, c_l, c_r, "self-intersection scenario");
  if (!(self_intersection_K(q, density) > 0.0)) {
    throw InvalidArgument("self-intersection scenario: K = g(c(z_l)) - g(c(z_r)) must be positive");
  }

  const SplitCurve curve{q};
  const std::size_t per_quarter = q.N / 4;
  CurveMesh mesh;
  mesh.orientation = Orientation::NormalLeftOfTangent;
  ReferenceFrame ref;
  std::vector<double> us;
  us.reserve(q.N);
  for (int quarter = 0; quarter < 4; ++quarter) {
    const double u0 = 0.25 * quarter;
    const ArcTable table([&](double u) { return curve.point(u); }, u0, u0 + 0.25, 20000);
    for (std::size_t k = 0; k < per_quarter; ++k) {
      const double s = table.length() * static_cast<double>(k) / static_cast<double>(per_quarter);
      us.push_back(k == 0 ? u0 : table.param_at(s));
    }
  }
  for (double u : us) {
    const Vec2 p = curve.point(u);
    const Vec2 nu = curve.normal(u);
    ref.point.push_back(p);
    ref.normal.push_back(nu);
    mesh.nodes.push_back(p + q.epsilon * q.rho0 * nu);
    mesh.concentration.push_back(q.c_mean - q.c_amplitude * std::sin(2.0 * kPi * u));
  }
  const std::size_t z_l = per_quarter;
  const std::size_t z_r = 3 * per_quarter;
  // The markers sit exactly on the axis of symmetry.
  ref.point[z_l] = {0.0, 0.0};
  ref.point[z_r] = {0.0, 0.0};
  ref.normal[z_l] = {-1.0, 0.0};
  ref.normal[z_r] = {1.0, 0.0};
  mesh.nodes[z_l] = {-q.epsilon * q.rho0, 0.0};
  mesh.nodes[z_r] = {q.epsilon * q.rho0, 0.0};
  mesh.reference = std::move(ref);
  mesh.h_min = 1e-4 * q.R;
  validate(mesh);

  if (auto hit = detect_self_intersection(mesh.nodes)) {
    std::ostringstream os;
    os << "self-intersection scenario: epsilon = " << q.epsilon << " gives a non-embedded initial curve (segments "
       << hit->first << " and " << hit->second << " intersect)";
    throw EpsilonTooLarge(os.str());
  }

  FlowState s;
  s.geometry = std::move(mesh);
  s.density = density;
  s.anchors = {z_l, z_r};
  s.markers = {{"z_l", z_l}, {"z_r", z_r}};
  require_in_range(density, s.concentration());
  return s;
}

double marker_height(const FlowState& state, const std::string& marker) {
  const auto* m = std::get_if<CurveMesh>(&state.geometry);
  if (!m || !m->reference) throw InvalidArgument("marker_height needs a curve with a reference frame");
  const auto it = state.markers.find(marker);
  if (it == state.markers.end()) throw InvalidArgument("unknown marker '" + marker + "'");
  const std::size_t i = it->second;
  return dot(m->nodes[i] - m->reference->point[i], m->reference->normal[i]);
}

double gap_function(const FlowState& state) { return marker_height(state, "z_l") + marker_height(state, "z_r"); }

// ---------------------------------------------------------------------------
// Time stepping

double stable_step(const FlowState& state, const StepperSettings& settings) {
  return settings.stability_constant * segment_lengths(state.geometry).min;
}

double mesh_quality_ratio(const FlowState& state) {
  const auto mm = segment_lengths(state.geometry);
  return mm.max / mm.min;
}

FlowState step(const FlowState& state, double dt, const StepperSettings& settings) {
  if (!(dt >= 0.0)) throw InvalidArgument("step: dt must be non-negative");
  if (dt == 0.0) return state;

  const auto v = polyline::make_view(state.geometry);
  const auto st = polyline::stencils(v);
  const auto segs = polyline::segments(v);
  const auto f = polyline::fields(v);
  const std::size_t n = v.points.size();
  const bool cyclic = v.topology != polyline::Topology::AxisCapped;

  double h_min = std::numeric_limits<double>::infinity();
  for (const auto& s : segs) h_min = std::min(h_min, s.length);
  if (dt > settings.stability_constant * h_min * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step: dt = " << dt << " exceeds the stability bound " << settings.stability_constant * h_min;
    throw StabilityError(os.str());
  }

  const auto& G = state.density;
  const auto& c = state.concentration();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = G.scaling_factor(c[i], 0);
    if (!(g[i] > 0.0)) {
      std::ostringstream os;
      os << "step: g(c) = " << g[i] << " <= 0 at node " << i;
      throw ParabolicityError(os.str());
    }
  }

  // Normal displacement delta_i = dt g_i H_i(new), with the profile curvature linearised in delta
  // on the frozen stencil and the azimuthal term -nu_r / r kept explicit.
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = st[i];
    const double a = dt * g[i] * (s.on_axis ? 2.0 : 1.0);
    diag[i] = 1.0 - a * s.w_center;
    rhs[i] = dt * g[i] * f.H[i];
    if (s.on_axis) {
      const std::size_t j = i == 0 ? 1 : n - 2;
      const double coupling = -a * (s.w_minus + s.w_plus) * dot(st[j].normal, s.normal);
      (i == 0 ? upper : lower)[i] = coupling;
      continue;
    }
    const std::size_t ip = i == 0 ? n - 1 : i - 1;
    const std::size_t in = i + 1 == n ? 0 : i + 1;
    lower[i] = -a * s.w_minus * dot(st[ip].normal, s.normal);
    upper[i] = -a * s.w_plus * dot(st[in].normal, s.normal);
  }
  const auto delta = solve_tridiagonal(lower, diag, upper, rhs, cyclic);

  std::vector<Vec2> pts = v.points;
  for (std::size_t i = 0; i < n; ++i) pts[i] += delta[i] * st[i].normal;

  FlowState next = state;
  assign_points(next.geometry, pts);
  if (v.axisymmetric) {
    const auto& p = std::get<RevolutionProfile>(next.geometry);
    for (std::size_t i = 0; i < n; ++i) {
      if (st[i].on_axis) continue;
      if (!(p.w[i] > 0.0)) {
        std::ostringstream os;
        os << "pinch-off: profile radius " << p.w[i] << " at node " << i;
        throw DegeneracyError(os.str());
      }
    }
  }

  const auto v1 = polyline::make_view(next.geometry);
  const auto segs1 = polyline::segments(v1);
  const auto area0 = lumped_area(n, segs);
  const auto area1 = lumped_area(n, segs1);

  // Conservative update A1 c1 = A0 c0 + dt sum_seg k G''_secant (c_b - c_a), all at the new time.
  std::vector<double> c_new = c;
  std::vector<double> mrhs(n);
  for (std::size_t i = 0; i < n; ++i) mrhs[i] = area0[i] * c[i];
  const int passes = std::max(1, settings.picard_iterations);
  for (int it = 0; it < passes; ++it) {
    std::fill(lower.begin(), lower.end(), 0.0);
    std::fill(upper.begin(), upper.end(), 0.0);
    diag = area1;
    for (const auto& s : segs1) {
      const double D = secant_second_derivative(G, c_new[s.a], c_new[s.b]);
      if (!(D >= 0.0)) throw ParabolicityError("step: G'' < 0 between neighbouring concentrations");
      const double k = dt * s.conductance * D;
      diag[s.a] += k;
      diag[s.b] += k;
      upper[s.a] = -k;
      lower[s.b] = -k;
    }
    c_new = solve_tridiagonal(lower, diag, upper, mrhs, cyclic);
    require_in_range(G, c_new);
  }

  next.concentration() = std::move(c_new);
  next.time = state.time + dt;
  next.step_count = state.step_count + 1;
  return next;
}

// ---------------------------------------------------------------------------
// Remeshing

namespace {

/// Cumulative mass along the arc length of the old polyline. Each node's mass c_i A_i is
/// spread uniformly over its two half-segments.
struct MassLine {
  std::vector<double> s;
  std::vector<double> m;
  double length = 0.0;
  double total = 0.0;
  bool periodic = false;

  [[nodiscard]] double at(double x) const {
    double shift = 0.0;
    if (periodic) {
      const double k = std::floor(x / length);
      x -= k * length;
      shift = k * total;
    }
    if (x <= s.front()) return shift + m.front();
    if (x >= s.back()) return shift + m.back();
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - s.begin());
    const double tau = (x - s[j - 1]) / (s[j] - s[j - 1]);
    return shift + m[j - 1] + tau * (m[j] - m[j - 1]);
  }
};

}  // namespace

FlowState remesh(const FlowState& state) {
  const auto v = polyline::make_view(state.geometry);
  const auto segs = polyline::segments(v);
  const std::size_t n = v.points.size();
  const bool closed = v.topology != polyline::Topology::AxisCapped;
  const auto& c = state.concentration();

  std::vector<double> S(segs.size() + 1, 0.0);
  for (std::size_t j = 0; j < segs.size(); ++j) S[j + 1] = S[j] + segs[j].length;
  const double L = S.back();

  MassLine ml;
  ml.periodic = closed;
  ml.length = L;
  ml.s.push_back(0.0);
  ml.m.push_back(0.0);
  for (std::size_t j = 0; j < segs.size(); ++j) {
    const auto& sg = segs[j];
    ml.s.push_back(S[j] + 0.5 * sg.length);
    ml.m.push_back(ml.m.back() + sg.measure_a * c[sg.a]);
    ml.s.push_back(S[j + 1]);
    ml.m.push_back(ml.m.back() + sg.measure_b * c[sg.b]);
  }
  ml.total = ml.m.back();

  std::vector<std::size_t> anchors = state.anchors;
  if (!closed) {
    anchors.push_back(0);
    anchors.push_back(n - 1);
  }
  if (anchors.empty()) anchors.push_back(0);
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  // Split the node budget between the pieces between consecutive anchors.
  const std::size_t pieces = closed ? anchors.size() : anchors.size() - 1;
  const std::size_t intervals = closed ? n : n - 1;
  std::vector<double> piece_len(pieces);
  for (std::size_t k = 0; k < pieces; ++k) {
    const double a = S[anchors[k]];
    const double b = k + 1 < anchors.size() ? S[anchors[k + 1]] : S[anchors[0]] + L;
    piece_len[k] = b - a;
  }
  std::vector<std::size_t> count(pieces, 1);
  std::vector<double> frac(pieces);
  std::size_t used = 0;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double ideal = piece_len[k] / L * static_cast<double>(intervals);
    count[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ideal)));
    frac[k] = ideal - std::floor(ideal);
    used += count[k];
  }
  std::vector<std::size_t> order(pieces);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; used < intervals; r = (r + 1) % pieces, ++used) ++count[order[r]];
  while (used > intervals) {
    const auto it = std::max_element(count.begin(), count.end());
    if (*it <= 1) throw MeshQualityError("remesh: too many anchors for the node budget");
    --*it;
    --used;
  }

  // New node arc positions; anchors keep their exact points.
  auto locate = [&](double s) -> std::pair<std::size_t, double> {
    s = std::clamp(s, 0.0, L);
    auto it = std::upper_bound(S.begin(), S.end(), s);
    std::size_t j = it == S.begin() ? 0 : static_cast<std::size_t>(it - S.begin()) - 1;
    j = std::min(j, segs.size() - 1);
    return {j, (s - S[j]) / segs[j].length};
  };
  auto point_at = [&](double s) -> Vec2 {
    const auto [j, tau] = locate(s);
    const Vec2 a = v.points[segs[j].a];
    const Vec2 b = polyline::next_point(v, segs[j].a);
    return a + tau * (b - a);
  };

  std::vector<double> s_new;
  std::vector<Vec2> p_new;
  std::vector<std::size_t> anchor_new;
  std::map<std::size_t, std::size_t> remap;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double a = S[anchors[k]];
    remap[anchors[k]] = s_new.size();
    anchor_new.push_back(s_new.size());
    for (std::size_t j = 0; j < count[k]; ++j) {
      const double s = a + piece_len[k] * static_cast<double>(j) / static_cast<double>(count[k]);
      s_new.push_back(s);
      p_new.push_back(j == 0 ? v.points[anchors[k]] : point_at(s >= L ? s - L : s));
    }
  }
  if (!closed) {
    remap[n - 1] = s_new.size();
    anchor_new.push_back(s_new.size());
    s_new.push_back(L);
    p_new.push_back(v.points[n - 1]);
  }

  FlowState out = state;
  assign_points(out.geometry, p_new);

  const auto v1 = polyline::make_view(out.geometry);
  const auto segs1 = polyline::segments(v1);
  const auto area1 = lumped_area(n, segs1);
  std::vector<double> c_new(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lo, hi;
    if (closed) {
      const double prev = i == 0 ? s_new[n - 1] - L : s_new[i - 1];
      const double next = i + 1 == n ? s_new[0] + L : s_new[i + 1];
      lo = 0.5 * (prev + s_new[i]);
      hi = 0.5 * (s_new[i] + next);
    } else {
      lo = i == 0 ? 0.0 : 0.5 * (s_new[i - 1] + s_new[i]);
      hi = i + 1 == n ? L : 0.5 * (s_new[i] + s_new[i + 1]);
    }
    c_new[i] = (ml.at(hi) - ml.at(lo)) / area1[i];
  }
  out.concentration() = std::move(c_new);

  if (auto* m = std::get_if<CurveMesh>(&out.geometry); m && m->reference) {
    const auto& old_ref = *std::get<CurveMesh>(state.geometry).reference;
    ReferenceFrame ref;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = s_new[i] >= L ? s_new[i] - L : s_new[i];
      const auto [j, tau] = locate(s);
      const std::size_t a = segs[j].a;
      const std::size_t b = segs[j].b;
      ref.point.push_back(old_ref.point[a] + tau * (old_ref.point[b] - old_ref.point[a]));
      const Vec2 nu = old_ref.normal[a] + tau * (old_ref.normal[b] - old_ref.normal[a]);
      ref.normal.push_back(nu / norm(nu));
    }
    for (const auto& [old_i, new_i] : remap) {
      ref.point[new_i] = old_ref.point[old_i];
      ref.normal[new_i] = old_ref.normal[old_i];
    }
    m->reference = std::move(ref);
  }

  out.anchors.clear();
  for (std::size_t a : state.anchors) out.anchors.push_back(remap.at(a));
  for (auto& [name, idx] : out.markers) idx = remap.at(idx);
  return out;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

struct Detection {
  bool fired = false;
  std::map<std::string, double> payload;
};

class EventDetectors {
 public:
  EventDetectors(const FlowState& initial, const RunOptions& opts) : opts_(opts), area0_(area(initial)) {
    if (opts.detect_convexity) armed_convexity_ = convexity_monitor(initial, opts.plateaus).convex;
    if (opts.detect_self_intersection) armed_crossing_ = gap_function(initial) > 0.0;
  }

  [[nodiscard]] Detection extinction(const FlowState& s) const {
    Detection d;
    const double a = area(s);
    if (a < opts_.extinction_area_fraction * area0_) {
      d.fired = true;
      d.payload = {{"area", a}, {"area_fraction", a / area0_}};
    }
    return d;
  }

  [[nodiscard]] Detection convexity(const FlowState& s) const {
    Detection d;
    if (!opts_.detect_convexity || !armed_convexity_) return d;
    const auto rep = convexity_monitor(s, opts_.plateaus);
    if (!rep.convex && rep.witness) {
      d.fired = true;
      d.payload = {{"gap", rep.witness->gap},
                   {"x_mid", rep.witness->x_mid},
                   {"y_end", rep.witness->y_end},
                   {"curvature_sign_changes", static_cast<double>(rep.curvature_sign_changes)}};
    }
    return d;
  }

  [[nodiscard]] Detection crossing(const FlowState& s) const {
    Detection d;
    if (!opts_.detect_self_intersection || !armed_crossing_) return d;
    const double gap = gap_function(s);
    if (gap >= 0.0) return d;
    const auto hit = detect_self_intersection(s);
    if (!hit) return d;
    d.fired = true;
    d.payload = {{"gap", gap},
                 {"rho_l", marker_height(s, "z_l")},
                 {"rho_r", marker_height(s, "z_r")},
                 {"segment_a", static_cast<double>(hit->first)},
                 {"segment_b", static_cast<double>(hit->second)},
                 {"x", hit->point.x},
                 {"y", hit->point.y}};
    return d;
  }

  void disarm(const std::string& type) {
    if (type == event_type::kConvexityLost) armed_convexity_ = false;
    if (type == event_type::kSelfIntersection) armed_crossing_ = false;
  }

 private:
  const RunOptions& opts_;
  double area0_;
  bool armed_convexity_ = false;
  bool armed_crossing_ = false;
};

/// Smallest step size in (0, h] for which `fires(step size)` holds, assuming it holds at h.
template <class Pred>
double bisect_step(double t0, double h, Pred&& fires) {
  double lo = 0.0;
  double hi = h;
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= std::min(1e-6, 1e-3 * (t0 + hi))) break;
    const double mid = 0.5 * (lo + hi);
    if (fires(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

bool step_throws(const FlowState& s, double h, const StepperSettings& st) {
  try {
    (void)step(s, h, st);
    return false;
  } catch (const DomainError&) {
    return true;
  } catch (const MeshQualityError&) {
    return true;
  }
}

}  // namespace

RunResult run(FlowState state, const RunOptions& opts) {
  if (!(opts.dt > 0.0)) throw InvalidArgument("run: dt must be positive");
  if (opts.monitor_every < 1) throw InvalidArgument("run: monitor_every must be >= 1");

  RunResult res;
  EventDetectors detect(state, opts);
  std::vector<std::string> pending;

  auto record_row = [&](const FlowState& s) {
    DiagnosticsRow row = diagnose(s);
    row.remeshes = res.remesh_count;
    row.events = std::move(pending);
    pending.clear();
    res.series.rows.push_back(row);
    if (opts.on_row) opts.on_row(s, res.series.rows.back());
  };
  auto record_event = [&](const std::string& type, double t, std::map<std::string, double> payload) {
    res.events.push_back(Event{type, t, std::move(payload)});
    pending.push_back(type);
  };

  res.initial = diagnose(state);
  record_row(state);

  const double t_end = opts.t_end;
  bool stop = false;
  while (!stop && state.time < t_end - 1e-14 * std::max(1.0, t_end)) {
    // A remainder within round-off of dt is folded into this step.
    const double remaining = t_end - state.time;
    double h = remaining <= opts.dt * (1.0 + 1e-9) ? remaining : opts.dt;
    h = std::min(h, stable_step(state, opts.stepper));
    if (!(h > 0.0)) break;

    FlowState next;
    try {
      next = step(state, h, opts.stepper);
    } catch (const DomainError&) {
      const double tau = bisect_step(state.time, h, [&](double x) { return step_throws(state, x, opts.stepper); });
      record_event(event_type::kDomainViolation, state.time + tau, {{"min_c", min_concentration(state)}});
      break;
    } catch (const MeshQualityError&) {
      const double tau = bisect_step(state.time, h, [&](double x) { return step_throws(state, x, opts.stepper); });
      record_event(event_type::kPinchOff, state.time + tau, {{"area", area(state)}});
      break;
    }

    using Check = Detection (EventDetectors::*)(const FlowState&) const;
    const std::pair<const char*, Check> checks[] = {
        {event_type::kConvexityLost, &EventDetectors::convexity},
        {event_type::kSelfIntersection, &EventDetectors::crossing},
        {event_type::kExtinction, &EventDetectors::extinction},
    };
    for (const auto& [type, check] : checks) {
      if (!(detect.*check)(next).fired) continue;
      auto fires = [&](double x) {
        try {
          return (detect.*check)(step(state, x, opts.stepper)).fired;
        } catch (const Error&) {
          return true;
        }
      };
      const double tau = bisect_step(state.time, h, fires);
      Detection at;
      try {
        at = (detect.*check)(step(state, tau, opts.stepper));
      } catch (const Error&) {
        at = (detect.*check)(next);
      }
      record_event(type, state.time + tau, at.payload);
      detect.disarm(type);
      if (std::string(type) == event_type::kExtinction || opts.stop_on.count(type)) stop = true;
    }

    const double h_min_allowed = geometry_h_min(next.geometry);
    if (mesh_quality_ratio(next) > opts.stepper.remesh_ratio || segment_lengths(next.geometry).min < h_min_allowed) {
      try {
        next = remesh(next);
        ++res.remesh_count;
      } catch (const MeshQualityError&) {
        record_event(event_type::kPinchOff, next.time, {{"area", area(next)}});
        stop = true;
      }
    }

    state = std::move(next);
    if (opts.after_step) opts.after_step(state);
    const bool at_end = state.time >= t_end - 1e-14 * std::max(1.0, t_end);
    if (stop || at_end || state.step_count % opts.monitor_every == 0) record_row(state);
  }
  if (!pending.empty()) record_row(state);

  finalize_dissipation(res.series.rows);
  res.final_state = std::move(state);
  return res;
}

}  // namespace scmcf
