#include "scmcf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <unordered_map>

#include "scmcf/error.hpp"

namespace scmcf {

namespace {

polyline::View view_of(const FlowState& s) { return polyline::make_view(s.geometry); }

std::vector<double> lumped_area(const polyline::View& v, const std::vector<polyline::Segment>& segs) {
  std::vector<double> a(v.points.size(), 0.0);
  for (const auto& s : segs) {
    a[s.a] += s.measure_a;
    a[s.b] += s.measure_b;
  }
  return a;
}

double weighted_sum(const FlowState& s, const std::function<double(double)>& f) {
  const auto v = view_of(s);
  const auto segs = polyline::segments(v);
  const auto a = lumped_area(v, segs);
  const auto& c = s.concentration();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) sum += f(c[i]) * a[i];
  return sum;
}

}  // namespace

double mass(const FlowState& state) {
  return weighted_sum(state, [](double c) { return c; });
}

double energy(const FlowState& state) {
  return weighted_sum(state, [&](double c) { return state.density.evaluate(c, 0); });
}

double area(const FlowState& state) { return total_area(state.geometry); }

double min_mean_curvature(const FlowState& state) {
  const auto H = geometry_fields(state.geometry).H;
  return *std::min_element(H.begin(), H.end());
}

double max_mean_curvature(const FlowState& state) {
  const auto H = geometry_fields(state.geometry).H;
  return *std::max_element(H.begin(), H.end());
}

double min_concentration(const FlowState& state) {
  const auto& c = state.concentration();
  return *std::min_element(c.begin(), c.end());
}

std::vector<double> normal_velocity(const FlowState& state) {
  const auto H = geometry_fields(state.geometry).H;
  const auto& c = state.concentration();
  std::vector<double> V(H.size());
  for (std::size_t i = 0; i < V.size(); ++i) V[i] = state.density.scaling_factor(c[i], 0) * H[i];
  return V;
}

double dissipation_rhs(const FlowState& state) {
  const auto v = view_of(state);
  const auto segs = polyline::segments(v);
  const auto a = lumped_area(v, segs);
  const auto f = polyline::fields(v);
  const auto& c = state.concentration();
  std::vector<double> dG(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) dG[i] = state.density.evaluate(c[i], 1);

  double grad = 0.0;
  for (const auto& s : segs) {
    const double d = dG[s.b] - dG[s.a];
    grad += s.conductance * d * d;
  }
  double vel = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double V = state.density.scaling_factor(c[i], 0) * f.H[i];
    vel += V * V * a[i];
  }
  return -(grad + vel);
}

DiagnosticsRow diagnose(const FlowState& state) {
  const auto v = view_of(state);
  const auto f = polyline::fields(v);
  const auto& c = state.concentration();
  const auto& G = state.density;

  DiagnosticsRow row;
  row.time = state.time;
  for (std::size_t i = 0; i < c.size(); ++i) {
    row.mass += c[i] * f.area_element[i];
    row.energy += G.evaluate(c[i], 0) * f.area_element[i];
  }
  row.area = total_area(state.geometry);
  row.min_H = *std::min_element(f.H.begin(), f.H.end());
  row.max_H = *std::max_element(f.H.begin(), f.H.end());
  row.min_c = *std::min_element(c.begin(), c.end());
  row.dissipation_rhs = dissipation_rhs(state);
  return row;
}

void finalize_dissipation(std::vector<DiagnosticsRow>& rows) {
  const std::size_t n = rows.size();
  if (n < 2) {
    for (auto& r : rows) r.dissipation_lhs = 0.0;
    return;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
    const double dt = rows[hi].time - rows[lo].time;
    rows[k].dissipation_lhs = dt > 0.0 ? (rows[hi].energy - rows[lo].energy) / dt : 0.0;
  }
}

double dissipation_residual(const std::vector<DiagnosticsRow>& rows) {
  if (rows.size() < 3) throw InvalidArgument("dissipation_residual needs at least 3 rows");
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1].time - rows[k - 1].time;
    if (!(dt > 0.0)) throw InvalidArgument("dissipation_residual: rows not increasing in time");
    if (rows[k + 1].remeshes != rows[k - 1].remeshes) continue;
    const double lhs = (rows[k + 1].energy - rows[k - 1].energy) / dt;
    const double rhs = rows[k].dissipation_rhs;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), kDissipationFloor));
  }
  return worst;
}

ConvexityReport convexity_monitor(const RevolutionProfile& profile, const std::optional<PlateauLayout>& layout,
                                  double threshold) {
  const std::size_t n = profile.size();
  ConvexityReport rep;

  const auto st = polyline::stencils(polyline::make_view(profile));
  int last_sign = 0;
  for (const auto& s : st) {
    const double kappa = -s.profile_curvature;
    if (std::abs(kappa) < 1e-8) continue;
    const int sign = kappa > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++rep.curvature_sign_changes;
    last_sign = sign;
  }

  if (layout) {
    const auto& L = *layout;
    double best_end = -std::numeric_limits<double>::infinity();
    double best_mid = std::numeric_limits<double>::infinity();
    double y_end = 0.0;
    double x_mid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = profile.x[i];
      const double w = profile.w[i];
      const bool end = (x >= L.end_left_lo && x <= L.end_left_hi) || (x >= L.end_right_lo && x <= L.end_right_hi);
      if (end && w > best_end) {
        best_end = w;
        y_end = x;
      }
      if (x >= L.mid_lo && x <= L.mid_hi && w < best_mid) {
        best_mid = w;
        x_mid = x;
      }
    }
    if (std::isfinite(best_end) && std::isfinite(best_mid) && best_end - best_mid > threshold) {
      rep.convex = false;
      rep.witness = ConvexityWitness{x_mid, y_end, best_end - best_mid};
    }
    return rep;
  }

  // Generic sag search: a node lying below both the left and the right running maxima.
  std::vector<double> left_max(n), right_max(n);
  std::vector<std::size_t> left_arg(n), right_arg(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || profile.w[i] > left_max[i - 1]) {
      left_max[i] = profile.w[i];
      left_arg[i] = i;
    } else {
      left_max[i] = left_max[i - 1];
      left_arg[i] = left_arg[i - 1];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 == n || profile.w[i] > right_max[i + 1]) {
      right_max[i] = profile.w[i];
      right_arg[i] = i;
    } else {
      right_max[i] = right_max[i + 1];
      right_arg[i] = right_arg[i + 1];
    }
  }
  double best_gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool use_left = left_max[i] <= right_max[i];
    const double gap = (use_left ? left_max[i] : right_max[i]) - profile.w[i];
    if (gap > threshold && gap > best_gap) {
      best_gap = gap;
      rep.convex = false;
      rep.witness = ConvexityWitness{profile.x[i], profile.x[use_left ? left_arg[i] : right_arg[i]], gap};
    }
  }
  return rep;
}

ConvexityReport convexity_monitor(const FlowState& state, const std::optional<PlateauLayout>& layout,
                                  double threshold) {
  const auto* p = std::get_if<RevolutionProfile>(&state.geometry);
  if (!p) throw InvalidArgument("convexity_monitor needs a surface of revolution");
  return convexity_monitor(*p, layout, threshold);
}

namespace {

int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

std::optional<Vec2> intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) {
    const Vec2 r = b - a;
    const Vec2 s = d - c;
    const double t = cross(c - a, s) / cross(r, s);
    return a + t * r;
  }
  if (o1 == 0 && on_segment(a, b, c)) return c;
  if (o2 == 0 && on_segment(a, b, d)) return d;
  if (o3 == 0 && on_segment(c, d, a)) return a;
  if (o4 == 0 && on_segment(c, d, b)) return b;
  return std::nullopt;
}

}  // namespace

std::optional<SegmentPair> detect_self_intersection(const std::vector<Vec2>& nodes) {
  const std::size_t n = nodes.size();
  if (n < 4) return std::nullopt;
  double max_len = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_len = std::max(max_len, norm(nodes[(i + 1) % n] - nodes[i]));
  if (!(max_len > 0.0)) return std::nullopt;
  const double cell = 2.0 * max_len;

  auto key = [](long long ix, long long iy) { return (ix << 32) ^ (iy & 0xffffffffLL); };
  std::unordered_map<long long, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = nodes[i];
    const Vec2 b = nodes[(i + 1) % n];
    const auto x0 = static_cast<long long>(std::floor(std::min(a.x, b.x) / cell));
    const auto x1 = static_cast<long long>(std::floor(std::max(a.x, b.x) / cell));
    const auto y0 = static_cast<long long>(std::floor(std::min(a.y, b.y) / cell));
    const auto y1 = static_cast<long long>(std::floor(std::max(a.y, b.y) / cell));
    for (long long ix = x0; ix <= x1; ++ix)
      for (long long iy = y0; iy <= y1; ++iy) grid[key(ix, iy)].push_back(i);
  }

  std::optional<SegmentPair> best;
  for (const auto& [k, segs] : grid) {
    for (std::size_t p = 0; p < segs.size(); ++p) {
      for (std::size_t q = p + 1; q < segs.size(); ++q) {
        std::size_t i = std::min(segs[p], segs[q]);
        std::size_t j = std::max(segs[p], segs[q]);
        if (j - i <= 1 || (i == 0 && j == n - 1)) continue;
        if (best && (i > best->first || (i == best->first && j >= best->second))) continue;
        if (auto pt = intersect(nodes[i], nodes[(i + 1) % n], nodes[j], nodes[(j + 1) % n])) {
          best = SegmentPair{i, j, *pt};
        }
      }
    }
  }
  return best;
}

std::optional<SegmentPair> detect_self_intersection(const CurveMesh& mesh) {
  return detect_self_intersection(mesh.nodes);
}

std::optional<SegmentPair> detect_self_intersection(const FlowState& state) {
  const auto* m = std::get_if<CurveMesh>(&state.geometry);
  if (!m) throw InvalidArgument("detect_self_intersection needs a plane curve");
  return detect_self_intersection(*m);
}

std::string series_csv_header() {
  return "t,mass,energy,area,min_H,max_H,min_c,diss_lhs,diss_rhs,events";
}

std::string series_csv_row(const DiagnosticsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", r.time, r.mass,
                r.energy, r.area, r.min_H, r.max_H, r.min_c, r.dissipation_lhs, r.dissipation_rhs);
  std::string line(buf);
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    if (i) line += ';';
    line += r.events[i];
  }
  return line;
}

}  // namespace scmcf
