#include "scmcf/radial.hpp"

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scmcf/error.hpp"

namespace scmcf::radial {

namespace {

constexpr double kRatioStable = 1e-9;
constexpr double kDivergentRatio = 1.0 - 1e-8;
constexpr int kStableShells = 3;

/// Integrand z / (d g(c(z))) of the extinction-time integral, i.e. -1/f(z).
double inverse_speed(const EnergyDensity& density, double m, int d, double alpha, double z) {
  const double c = m / alpha * std::pow(z, -d);
  const double g = density.scaling_factor(c, 0);
  if (!(g > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "scaling factor g(" << c << ") = " << g << " is not positive";
    throw ParabolicityError(os.str());
  }
  return z / (d * g);
}

struct Piece {
  double value = 0.0;
  double error = 0.0;
};

Piece integrate(const EnergyDensity& density, double m, int d, double a, double b, int max_depth) {
  const double alpha = unit_sphere_area(d);
  auto f = [&](double z) { return inverse_speed(density, m, d, alpha, z); };
  Piece p;
  p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, 1e-13,
                                                                         &p.error);
  return p;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << what << " must be positive, got " << v;
    throw DomainError(os.str());
  }
}

}  // namespace

double unit_sphere_area(int d) {
  if (d < 1) throw InvalidArgument("dimension d must be >= 1");
  if (d == 1) return 2.0 * std::numbers::pi;
  if (d == 2) return 4.0 * std::numbers::pi;
  const double k = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

double RadialState::concentration() const { return m / alpha_d * std::pow(R, -d); }

RadialState make_state(double m, int d, double R) {
  require_positive(R, "radius R");
  require_positive(m, "mass m");
  return RadialState{R, d, m, unit_sphere_area(d)};
}

double radial_concentration(double m, int d, double R) {
  require_positive(R, "radius R");
  require_positive(m, "mass m");
  return m / unit_sphere_area(d) * std::pow(R, -d);
}

double radial_rhs(const EnergyDensity& density, double m, int d, double R) {
  const double c = radial_concentration(m, d, R);
  return -density.scaling_factor(c, 0) * d / R;
}

double separation_oracle(const EnergyDensity& density, double m, int d, double R0, double R,
                         const QuadratureOptions& opts) {
  require_positive(R0, "initial radius R0");
  if (R < 0.0 || R > R0) throw DomainError("separation_oracle requires 0 <= R <= R0");
  if (R == R0) return 0.0;
  if (R == 0.0) {
    const auto ext = extinction_time(density, m, d, R0, ExtinctionOptions{.abs_tol = opts.abs_tol});
    if (!ext.finite()) throw QuadratureError("separation_oracle: non-integrable singularity at R = 0");
    return ext.T;
  }
  const Piece p = integrate(density, m, d, R, R0, opts.max_depth);
  if (!(p.error <= opts.abs_tol) || !std::isfinite(p.value)) {
    std::ostringstream os;
    os << "separation_oracle: quadrature error " << p.error << " above tolerance " << opts.abs_tol;
    throw QuadratureError(os.str());
  }
  return p.value;
}

ExtinctionResult extinction_time(const EnergyDensity& density, double m, int d, double R0,
                                 const ExtinctionOptions& opts) {
  require_positive(R0, "initial radius R0");
  require_positive(m, "mass m");
  const double alpha = unit_sphere_area(d);

  // Fails fast with ParabolicityError if g(c(R0)) <= 0.
  (void)inverse_speed(density, m, d, alpha, R0);

  ExtinctionResult result;
  if (opts.power_law_fast_path) {
    if (const auto* p = std::get_if<PowerLaw>(&density.kind())) {
      if (p->s * d + 2.0 <= 0.0) {
        result.status = ExtinctionResult::Status::Divergent;
        result.T = std::numeric_limits<double>::infinity();
        return result;
      }
    }
  }

  double sum = 0.0;
  double err = 0.0;
  double prev_piece = 0.0;
  double prev_ratio = std::numeric_limits<double>::quiet_NaN();
  int stable = 0;
  double hi = R0;
  for (int k = 0; k < opts.max_halvings; ++k) {
    const double lo = 0.5 * hi;
    if (!(lo > std::numeric_limits<double>::min() * 1e10)) break;
    const double c_lo = m / alpha * std::pow(lo, -d);
    if (!std::isfinite(c_lo) || !density.valid_range().contains(c_lo)) break;

    const Piece piece = integrate(density, m, d, lo, hi, 15);
    sum += piece.value;
    err += piece.error;
    hi = lo;

    if (k > 0 && prev_piece > 0.0) {
      const double ratio = piece.value / prev_piece;
      if (std::abs(ratio - prev_ratio) <= kRatioStable * std::max(1.0, std::abs(ratio))) {
        ++stable;
      } else {
        stable = 0;
      }
      prev_ratio = ratio;
      if (stable >= kStableShells) {
        if (ratio >= kDivergentRatio) {
          result.status = ExtinctionResult::Status::Divergent;
          result.T = std::numeric_limits<double>::infinity();
          result.quadrature_error = err;
          return result;
        }
        const double tail = piece.value * ratio / (1.0 - ratio);
        result.status = ExtinctionResult::Status::Finite;
        result.T = sum + tail;
        result.quadrature_error = err + kRatioStable * std::abs(tail) / (1.0 - ratio);
        return result;
      }
      if (piece.value <= 1e-3 * opts.abs_tol && ratio < 1.0) {
        result.status = ExtinctionResult::Status::Finite;
        result.T = sum + piece.value * ratio / (1.0 - ratio);
        result.quadrature_error = err + piece.value * ratio / (1.0 - ratio);
        return result;
      }
    }
    if (!std::isfinite(sum) || sum > 1e100) {
      result.status = ExtinctionResult::Status::Divergent;
      result.T = std::numeric_limits<double>::infinity();
      result.quadrature_error = err;
      return result;
    }
    prev_piece = piece.value;
  }

  // Budget exhausted without a stable ratio: decide by the last observed ratio.
  if (std::isnan(prev_ratio) || prev_ratio >= kDivergentRatio) {
    result.status = ExtinctionResult::Status::Divergent;
    result.T = std::numeric_limits<double>::infinity();
  } else {
    const double tail = prev_piece * prev_ratio / (1.0 - prev_ratio);
    result.status = ExtinctionResult::Status::Finite;
    result.T = sum + tail;
    err += std::abs(tail);
  }
  result.quadrature_error = err;
  return result;
}

RadialTrajectory solve_radial(const EnergyDensity& density, double m, int d, double R0, double t_end,
                              double dt, const OdeOptions& opts) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;

  require_positive(R0, "initial radius R0");
  require_positive(dt, "sampling step dt");
  if (t_end < 0.0) throw InvalidArgument("solve_radial: t_end must be >= 0");

  auto rhs = [&](const State& x, State& dxdt, double) {
    if (!(x[0] > 0.0)) throw DomainError("radius left (0, inf)");
    dxdt[0] = radial_rhs(density, m, d, x[0]);
  };
  auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());

  RadialTrajectory traj;
  traj.points.push_back({0.0, R0});
  State x{R0};
  double t = 0.0;
  double h = std::min(dt, 1e-3 * R0 * R0);
  const double r_stop = opts.extinction_radius * R0;
  const auto samples = static_cast<long>(std::ceil(t_end / dt - 1e-12));

  for (long k = 1; k <= samples; ++k) {
    const double target = std::min(static_cast<double>(k) * dt, t_end);
    while (t < target) {
      h = std::min(h, target - t);
      bool ok = false;
      try {
        ok = stepper.try_step(rhs, x, t, h) == odeint::success;
      } catch (const DomainError&) {
        h *= 0.5;
      }
      if (x[0] <= r_stop || h < 1e-15 * std::max(1.0, t)) {
        traj.extinction_time = t;
        return traj;
      }
      if (ok && target - t < 1e-14 * std::max(1.0, target)) t = target;
    }
    traj.points.push_back({t, x[0]});
  }
  return traj;
}

}  // namespace scmcf::radial
