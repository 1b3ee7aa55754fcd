#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <variant>

namespace scmcf {

/// Open interval (lo, hi) of admissible concentrations.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool contains(double c) const { return c > lo && c < hi; }
};

/// G(c) = c^s / (1 - s) + alpha * c.
struct PowerLaw {
  double s = -1.0;
  double alpha = 1.0;
};

/// G(c) = value.
struct ConstantDensity {
  double value = 1.0;
};

/// User-supplied G with its first three derivatives. No numerical differentiation is done.
struct Tabulated {
  std::array<std::function<double(double)>, 4> derivatives;
  std::string name = "tabulated";
};

/// Lower bound of the valid range for power laws with s < 0.
inline constexpr double kPowerLawLowerBound = 1e-12;

/// Energy density G together with its admissible concentration range.
///
/// Immutable after construction; evaluation is analytic for the closed-form kinds.
class EnergyDensity {
 public:
  using Kind = std::variant<PowerLaw, ConstantDensity, Tabulated>;

  EnergyDensity(Kind kind, Interval valid_range);

  static EnergyDensity power_law(double s, double alpha);
  static EnergyDensity constant(double value);
  static EnergyDensity tabulated(Tabulated t, Interval valid_range);

  /// k-th derivative of G at c, k in {0,1,2,3}.
  [[nodiscard]] double evaluate(double c, int order) const;

  /// g(c) = G(c) - G'(c) c (order 0) and g'(c) = -G''(c) c (order 1).
  [[nodiscard]] double scaling_factor(double c, int order = 0) const;

  [[nodiscard]] const Interval& valid_range() const { return range_; }
  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] std::string describe() const;

 private:
  void require_in_range(double c) const;

  Kind kind_;
  Interval range_;
};

/// Builds the power-law density; throws InvalidExponent for s == 1 and InvalidArgument for alpha < 0.
EnergyDensity make_power_law(double s, double alpha);

struct ParabolicityReport {
  bool g_positive = false;
  bool G_second_positive = false;
  double min_g = 0.0;
  double min_G_second = 0.0;
  Interval sampled_range;
  int samples = 0;
};

/// Samples g and G'' at n uniformly spaced points of the closed interval [range.lo, range.hi].
ParabolicityReport check_parabolicity(const EnergyDensity& density, Interval range, int n);

}  // namespace scmcf
