#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "scmcf/meshgeom.hpp"

namespace shapes {

using scmcf::CurveMesh;
using scmcf::Orientation;
using scmcf::RevolutionProfile;
using scmcf::Vec2;

inline constexpr double kPi = std::numbers::pi;

/// Counter-clockwise ellipse sampled uniformly in the parameter angle.
inline CurveMesh ellipse(double a, double b, std::size_t n, Orientation o = Orientation::NormalRightOfTangent) {
  CurveMesh m;
  m.orientation = o;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    m.nodes.push_back({a * std::cos(t), b * std::sin(t)});
  }
  m.concentration.assign(n, 1.0);
  return m;
}

inline CurveMesh circle(double R, std::size_t n, Orientation o = Orientation::NormalRightOfTangent) {
  return ellipse(R, R, n, o);
}

/// Signed curvature magnitude of the ellipse at parameter t.
inline double ellipse_curvature(double a, double b, double t) {
  const double s = std::sin(t), c = std::cos(t);
  return a * b / std::pow(a * a * s * s + b * b * c * c, 1.5);
}

/// Spheroid profile x = -a cos(t), w = b sin(t), uniform in t, capped.
inline RevolutionProfile spheroid(double a, double b, std::size_t n) {
  RevolutionProfile p;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = kPi * static_cast<double>(i) / static_cast<double>(n - 1);
    p.x.push_back(-a * std::cos(t));
    p.w.push_back(i == 0 || i + 1 == n ? 0.0 : b * std::sin(t));
  }
  p.concentration.assign(n, 1.0);
  return p;
}

/// Mean curvature (outward normal, so negative) of the spheroid at parameter t.
inline double spheroid_mean_curvature(double a, double b, double t) {
  const double D = std::sqrt(a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t));
  const double meridian = a * b / (D * D * D);
  const double parallel = a / (b * D);
  return -(meridian + parallel);
}

inline RevolutionProfile sphere(double R, std::size_t n) { return spheroid(R, R, n); }

/// Periodic profile w(x) over [0, L), uniform in x.
template <class F>
RevolutionProfile periodic(F w, double L, std::size_t n) {
  RevolutionProfile p;
  p.closure = scmcf::Closure::Periodic;
  p.period = L;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = L * static_cast<double>(i) / static_cast<double>(n);
    p.x.push_back(x);
    p.w.push_back(w(x));
  }
  p.concentration.assign(n, 1.0);
  return p;
}

inline RevolutionProfile cylinder(double radius, double L, std::size_t n) {
  return periodic([radius](double) { return radius; }, L, n);
}

}  // namespace shapes
