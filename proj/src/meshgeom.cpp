#include "scmcf/meshgeom.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scmcf/error.hpp"

namespace scmcf {

namespace polyline {

namespace {

Vec2 mirror(Vec2 p) { return {p.x, -p.y}; }

}  // namespace

View make_view(const CurveMesh& mesh) {
  View v;
  v.points = mesh.nodes;
  v.topology = Topology::ClosedLoop;
  v.left_normal = mesh.orientation == Orientation::NormalLeftOfTangent;
  v.axisymmetric = false;
  return v;
}

View make_view(const RevolutionProfile& profile) {
  if (profile.x.size() != profile.w.size()) {
    throw MeshQualityError("revolution profile: x and w differ in length");
  }
  View v;
  v.points.resize(profile.x.size());
  for (std::size_t i = 0; i < profile.x.size(); ++i) v.points[i] = {profile.x[i], profile.w[i]};
  v.topology = profile.closure == Closure::CappedEnds ? Topology::AxisCapped : Topology::AxisPeriodic;
  v.shift = {profile.period, 0.0};
  v.left_normal = true;
  v.axisymmetric = true;
  return v;
}

View make_view(const Geometry& g) {
  return std::visit([](const auto& m) { return make_view(m); }, g);
}

Vec2 previous_point(const View& v, std::size_t i) {
  const std::size_t n = v.points.size();
  if (i > 0) return v.points[i - 1];
  switch (v.topology) {
    case Topology::ClosedLoop:
      return v.points[n - 1];
    case Topology::AxisPeriodic:
      return v.points[n - 1] - v.shift;
    case Topology::AxisCapped:
      return mirror(v.points[1]);
  }
  return {};
}

Vec2 next_point(const View& v, std::size_t i) {
  const std::size_t n = v.points.size();
  if (i + 1 < n) return v.points[i + 1];
  switch (v.topology) {
    case Topology::ClosedLoop:
      return v.points[0];
    case Topology::AxisPeriodic:
      return v.points[0] + v.shift;
    case Topology::AxisCapped:
      return mirror(v.points[n - 2]);
  }
  return {};
}

std::vector<Segment> segments(const View& v) {
  const std::size_t n = v.points.size();
  const std::size_t count = v.topology == Topology::AxisCapped ? n - 1 : n;
  std::vector<Segment> segs(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t b = (s + 1) % n;
    const Vec2 pa = v.points[s];
    const Vec2 pb = (b == 0) ? next_point(v, s) : v.points[b];
    Segment& seg = segs[s];
    seg.a = s;
    seg.b = b;
    seg.length = norm(pb - pa);
    if (!(seg.length > 0.0)) {
      std::ostringstream os;
      os << "degenerate segment between nodes " << s << " and " << b;
      throw MeshQualityError(os.str());
    }
    if (v.axisymmetric) {
      const double r_sum = pa.y + pb.y;
      seg.conductance = std::numbers::pi * r_sum / seg.length;
      seg.measure = std::numbers::pi * r_sum * seg.length;
      seg.measure_a = 0.25 * std::numbers::pi * (3.0 * pa.y + pb.y) * seg.length;
      seg.measure_b = 0.25 * std::numbers::pi * (pa.y + 3.0 * pb.y) * seg.length;
    } else {
      seg.conductance = 1.0 / seg.length;
      seg.measure = seg.length;
      seg.measure_a = 0.5 * seg.length;
      seg.measure_b = 0.5 * seg.length;
    }
  }
  return segs;
}

std::vector<NodeStencil> stencils(const View& v) {
  const std::size_t n = v.points.size();
  std::vector<NodeStencil> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = v.points[i];
    const Vec2 prev = previous_point(v, i);
    const Vec2 next = next_point(v, i);
    NodeStencil& st = out[i];
    st.h_minus = norm(p - prev);
    st.h_plus = norm(next - p);
    if (!(st.h_minus > 0.0) || !(st.h_plus > 0.0)) {
      std::ostringstream os;
      os << "degenerate segment at node " << i;
      throw MeshQualityError(os.str());
    }
    const double hm = st.h_minus;
    const double hp = st.h_plus;
    const double sum = hm + hp;
    st.w_minus = 2.0 / (hm * sum);
    st.w_plus = 2.0 / (hp * sum);
    st.w_center = -(st.w_minus + st.w_plus);

    Vec2 t = (hm * hm * (next - p) + hp * hp * (p - prev)) / (hm * hp * sum);
    const double tn = norm(t);
    if (!(tn > 0.0)) {
      std::ostringstream os;
      os << "cusp at node " << i << ": tangent vanishes";
      throw MeshQualityError(os.str());
    }
    t = t / tn;
    st.tangent = t;
    st.normal = v.left_normal ? perp_left(t) : perp_right(t);
    const Vec2 xss = st.w_minus * prev + st.w_center * p + st.w_plus * next;
    st.profile_curvature = dot(xss, st.normal);
    st.on_axis = v.axisymmetric && v.topology == Topology::AxisCapped && (i == 0 || i + 1 == n);
    if (st.on_axis) {
      // Exact axis normal; the mirrored stencil already gives it up to round-off.
      st.normal = {i == 0 ? -1.0 : 1.0, 0.0};
      st.tangent = {0.0, i == 0 ? 1.0 : -1.0};
      st.profile_curvature = dot(xss, st.normal);
    }
  }
  return out;
}

GeometryFields fields(const View& v) {
  const std::size_t n = v.points.size();
  const auto st = stencils(v);
  const auto segs = segments(v);

  GeometryFields f;
  f.H.resize(n);
  f.normal.resize(n);
  f.area_element.assign(n, 0.0);
  for (const auto& s : segs) {
    f.area_element[s.a] += s.measure_a;
    f.area_element[s.b] += s.measure_b;
  }
  for (std::size_t i = 0; i < n; ++i) {
    f.normal[i] = st[i].normal;
    if (!v.axisymmetric) {
      f.H[i] = st[i].profile_curvature;
    } else if (st[i].on_axis) {
      f.H[i] = 2.0 * st[i].profile_curvature;
    } else {
      const double r = v.points[i].y;
      if (!(r > 0.0)) {
        std::ostringstream os;
        os << "profile radius " << r << " <= 0 at interior node " << i;
        throw DegeneracyError(os.str());
      }
      f.H[i] = st[i].profile_curvature - st[i].normal.y / r;
    }
  }
  return f;
}

}  // namespace polyline

void validate(const CurveMesh& mesh) {
  const std::size_t n = mesh.nodes.size();
  if (n < kMinNodes) throw MeshQualityError("curve mesh needs at least 8 nodes");
  if (mesh.concentration.size() != n) throw MeshQualityError("curve mesh: concentration size mismatch");
  if (mesh.reference) {
    if (mesh.reference->normal.size() != n || mesh.reference->point.size() != n) {
      throw MeshQualityError("curve mesh: reference frame size mismatch");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double len = norm(mesh.nodes[(i + 1) % n] - mesh.nodes[i]);
    if (!(len > 0.0) || len < mesh.h_min) {
      std::ostringstream os;
      os << "curve mesh: segment " << i << " has length " << len << " below h_min " << mesh.h_min;
      throw MeshQualityError(os.str());
    }
  }
  for (const auto& nu : curve_geometry(mesh).normal) {
    if (std::abs(norm(nu) - 1.0) > 1e-12) throw MeshQualityError("curve mesh: non-unit normal");
  }
}

void validate(const RevolutionProfile& profile) {
  const std::size_t n = profile.x.size();
  if (n < kMinNodes) throw MeshQualityError("revolution profile needs at least 8 nodes");
  if (profile.w.size() != n || profile.concentration.size() != n) {
    throw MeshQualityError("revolution profile: field size mismatch");
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(profile.x[i + 1] > profile.x[i])) {
      std::ostringstream os;
      os << "revolution profile: x not strictly increasing at node " << i;
      throw MeshQualityError(os.str());
    }
    const double len = std::hypot(profile.x[i + 1] - profile.x[i], profile.w[i + 1] - profile.w[i]);
    if (len < profile.h_min) {
      std::ostringstream os;
      os << "revolution profile: segment " << i << " has length " << len << " below h_min " << profile.h_min;
      throw MeshQualityError(os.str());
    }
  }
  const bool capped = profile.closure == Closure::CappedEnds;
  if (capped && (profile.w.front() != 0.0 || profile.w.back() != 0.0)) {
    throw MeshQualityError("revolution profile: capped ends require w = 0 at both end nodes");
  }
  if (!capped && !(profile.period > profile.x.back() - profile.x.front())) {
    throw MeshQualityError("revolution profile: period must exceed the x extent of the nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool end = capped && (i == 0 || i + 1 == n);
    if (!end && !(profile.w[i] > 0.0)) {
      std::ostringstream os;
      os << "revolution profile: w = " << profile.w[i] << " <= 0 at interior node " << i;
      throw DegeneracyError(os.str());
    }
  }
}

GeometryFields curve_geometry(const CurveMesh& mesh) { return polyline::fields(polyline::make_view(mesh)); }

GeometryFields revolution_geometry(const RevolutionProfile& profile) {
  return polyline::fields(polyline::make_view(profile));
}

GeometryFields geometry_fields(const Geometry& g) { return polyline::fields(polyline::make_view(g)); }

std::vector<double> graph_mean_curvature(const RevolutionProfile& p) {
  const std::size_t n = p.x.size();
  const bool periodic = p.closure == Closure::Periodic;
  std::vector<double> H(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    double xm, xp, wm, wp;
    if (i == 0 || i + 1 == n) {
      if (!periodic) continue;
      xm = i == 0 ? p.x[n - 1] - p.period : p.x[i - 1];
      wm = i == 0 ? p.w[n - 1] : p.w[i - 1];
      xp = i + 1 == n ? p.x[0] + p.period : p.x[i + 1];
      wp = i + 1 == n ? p.w[0] : p.w[i + 1];
    } else {
      xm = p.x[i - 1];
      wm = p.w[i - 1];
      xp = p.x[i + 1];
      wp = p.w[i + 1];
    }
    const double w = p.w[i];
    if (!(w > 0.0)) {
      std::ostringstream os;
      os << "graph curvature: w = " << w << " <= 0 at interior node " << i;
      throw DegeneracyError(os.str());
    }
    const double hm = p.x[i] - xm;
    const double hp = xp - p.x[i];
    const double wx = (hm * hm * (wp - w) + hp * hp * (w - wm)) / (hm * hp * (hm + hp));
    const double wxx = 2.0 / (hm + hp) * ((wp - w) / hp - (w - wm) / hm);
    const double q = 1.0 + wx * wx;
    H[i] = (wxx / q - 1.0 / w) / std::sqrt(q);
  }
  return H;
}

std::vector<double> normal_velocity_revolution(std::span<const double> dw_dt, std::span<const double> w_x) {
  if (dw_dt.size() != w_x.size()) throw InvalidArgument("normal_velocity_revolution: size mismatch");
  std::vector<double> V(dw_dt.size());
  for (std::size_t i = 0; i < V.size(); ++i) V[i] = dw_dt[i] / std::sqrt(1.0 + w_x[i] * w_x[i]);
  return V;
}

namespace {

std::vector<double> laplace_beltrami_view(std::span<const double> f, const polyline::View& v) {
  const std::size_t n = v.points.size();
  if (f.size() != n) throw InvalidArgument("laplace_beltrami: field size mismatch");
  const auto segs = polyline::segments(v);
  std::vector<double> area(n, 0.0);
  std::vector<double> flux(n, 0.0);
  for (const auto& s : segs) {
    area[s.a] += s.measure_a;
    area[s.b] += s.measure_b;
    const double q = s.conductance * (f[s.b] - f[s.a]);
    flux[s.a] += q;
    flux[s.b] -= q;
  }
  for (std::size_t i = 0; i < n; ++i) flux[i] /= area[i];
  return flux;
}

double integral_view(std::span<const double> f, const polyline::View& v) {
  const std::size_t n = v.points.size();
  if (f.size() != n) throw InvalidArgument("surface_integral: field size mismatch");
  const auto segs = polyline::segments(v);
  double sum = 0.0;
  for (const auto& s : segs) sum += s.measure_a * f[s.a] + s.measure_b * f[s.b];
  return sum;
}

}  // namespace

std::vector<double> laplace_beltrami(std::span<const double> field, const CurveMesh& mesh) {
  return laplace_beltrami_view(field, polyline::make_view(mesh));
}

std::vector<double> laplace_beltrami(std::span<const double> field, const RevolutionProfile& profile) {
  return laplace_beltrami_view(field, polyline::make_view(profile));
}

std::vector<double> laplace_beltrami(std::span<const double> field, const Geometry& g) {
  return laplace_beltrami_view(field, polyline::make_view(g));
}

double surface_integral(std::span<const double> field, const CurveMesh& mesh) {
  return integral_view(field, polyline::make_view(mesh));
}

double surface_integral(std::span<const double> field, const RevolutionProfile& profile) {
  return integral_view(field, polyline::make_view(profile));
}

double surface_integral(std::span<const double> field, const Geometry& g) {
  return integral_view(field, polyline::make_view(g));
}

double total_area(const Geometry& g) {
  double sum = 0.0;
  for (const auto& s : polyline::segments(polyline::make_view(g))) sum += s.measure;
  return sum;
}

double dirichlet_pairing(std::span<const double> f, std::span<const double> h, const Geometry& g) {
  const auto segs = polyline::segments(polyline::make_view(g));
  double sum = 0.0;
  for (const auto& s : segs) sum += s.conductance * (f[s.b] - f[s.a]) * (h[s.b] - h[s.a]);
  return sum;
}

}  // namespace scmcf
