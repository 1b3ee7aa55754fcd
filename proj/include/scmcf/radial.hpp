#pragma once

#include <optional>
#include <vector>

#include "scmcf/density.hpp"

namespace scmcf::radial {

/// Area of the unit d-sphere in R^{d+1}: 2 pi for d = 1, 4 pi for d = 2.
double unit_sphere_area(int d);

/// Sphere of radius R carrying total mass m with spatially constant concentration.
struct RadialState {
  double R = 1.0;
  int d = 1;
  double m = 1.0;
  double alpha_d = 0.0;

  [[nodiscard]] double concentration() const;
};

RadialState make_state(double m, int d, double R);

/// c = (m / alpha_d) R^{-d}.
double radial_concentration(double m, int d, double R);

/// f(R) = -g(c(R)) d / R, the radius velocity R' = V = g(c) H.
double radial_rhs(const EnergyDensity& density, double m, int d, double R);

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 30;
};

/// F(R) = int_{R0}^{R} dz / f(z): the time at which the radius reaches R.
double separation_oracle(const EnergyDensity& density, double m, int d, double R0, double R,
                         const QuadratureOptions& opts = {});

struct ExtinctionResult {
  enum class Status { Finite, Divergent };
  Status status = Status::Finite;
  /// Extinction time; +inf when divergent.
  double T = 0.0;
  double quadrature_error = 0.0;

  [[nodiscard]] bool finite() const { return status == Status::Finite; }
};

struct ExtinctionOptions {
  double abs_tol = 1e-10;
  /// Decide power laws analytically (divergent iff s d + 2 <= 0).
  bool power_law_fast_path = true;
  int max_halvings = 2000;
};

/// T = (1/d) int_0^{R0} z / g(m/alpha_d z^{-d}) dz, summed over dyadic shells [R0/2^{k+1}, R0/2^k]
/// with a ratio test on consecutive shells.
ExtinctionResult extinction_time(const EnergyDensity& density, double m, int d, double R0,
                                 const ExtinctionOptions& opts = {});

struct TrajectoryPoint {
  double t = 0.0;
  double R = 0.0;
};

struct RadialTrajectory {
  std::vector<TrajectoryPoint> points;
  /// Set when R reached numerical zero before t_end.
  std::optional<double> extinction_time;
};

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  /// Radius at which the sphere is considered extinct, relative to R0.
  double extinction_radius = 1e-6;
};

/// Adaptive Dormand-Prince integration of R' = f(R), sampled every dt up to t_end.
RadialTrajectory solve_radial(const EnergyDensity& density, double m, int d, double R0, double t_end,
                              double dt, const OdeOptions& opts = {});

}  // namespace scmcf::radial
