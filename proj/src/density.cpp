#include "scmcf/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scmcf/error.hpp"

namespace scmcf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double power_law_derivative(const PowerLaw& p, double c, int order) {
  const double s = p.s;
  switch (order) {
    case 0:
      return std::pow(c, s) / (1.0 - s) + p.alpha * c;
    case 1:
      return s / (1.0 - s) * std::pow(c, s - 1.0) + p.alpha;
    case 2:
      // s(s-1)/(1-s) = -s
      return -s * std::pow(c, s - 2.0);
    case 3:
      return -s * (s - 2.0) * std::pow(c, s - 3.0);
    default:
      throw InvalidArgument("derivative order must be in 0..3");
  }
}

}  // namespace

EnergyDensity::EnergyDensity(Kind kind, Interval valid_range)
    : kind_(std::move(kind)), range_(valid_range) {
  if (!(range_.lo < range_.hi)) {
    throw InvalidArgument("energy density: empty valid range");
  }
}

EnergyDensity EnergyDensity::power_law(double s, double alpha) { return make_power_law(s, alpha); }

EnergyDensity EnergyDensity::constant(double value) {
  return EnergyDensity(ConstantDensity{value}, Interval{});
}

EnergyDensity EnergyDensity::tabulated(Tabulated t, Interval valid_range) {
  for (const auto& f : t.derivatives) {
    if (!f) throw InvalidArgument("tabulated density must supply derivatives of order 0..3");
  }
  return EnergyDensity(std::move(t), valid_range);
}

EnergyDensity make_power_law(double s, double alpha) {
  if (s == 1.0) throw InvalidExponent("power law: exponent s = 1 is not admissible");
  if (!(alpha >= 0.0)) throw InvalidArgument("power law: alpha must be >= 0");
  const double lo = s < 0.0 ? kPowerLawLowerBound : 0.0;
  return EnergyDensity(PowerLaw{s, alpha}, Interval{lo, std::numeric_limits<double>::infinity()});
}

void EnergyDensity::require_in_range(double c) const {
  if (!range_.contains(c)) {
    std::ostringstream os;
    os.precision(17);
    os << "concentration " << c << " outside valid range (" << range_.lo << ", " << range_.hi << ")";
    throw DomainError(os.str());
  }
}

double EnergyDensity::evaluate(double c, int order) const {
  if (order < 0 || order > 3) throw InvalidArgument("derivative order must be in 0..3");
  require_in_range(c);
  return std::visit(Overloaded{
                        [&](const PowerLaw& p) { return power_law_derivative(p, c, order); },
                        [&](const ConstantDensity& k) { return order == 0 ? k.value : 0.0; },
                        [&](const Tabulated& t) { return t.derivatives[order](c); },
                    },
                    kind_);
}

double EnergyDensity::scaling_factor(double c, int order) const {
  if (order == 0) {
    if (const auto* p = std::get_if<PowerLaw>(&kind_)) {
      require_in_range(c);
      return std::pow(c, p->s);
    }
    return evaluate(c, 0) - evaluate(c, 1) * c;
  }
  if (order == 1) return -evaluate(c, 2) * c;
  throw InvalidArgument("scaling factor order must be 0 or 1");
}

std::string EnergyDensity::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const PowerLaw& p) { os << "PowerLaw(s=" << p.s << ", alpha=" << p.alpha << ")"; },
                 [&](const ConstantDensity& k) { os << "Constant(" << k.value << ")"; },
                 [&](const Tabulated& t) { os << "Tabulated(" << t.name << ")"; },
             },
             kind_);
  return os.str();
}

ParabolicityReport check_parabolicity(const EnergyDensity& density, Interval range, int n) {
  if (!(range.lo < range.hi)) throw InvalidArgument("check_parabolicity: empty range");
  if (n < 2) throw InvalidArgument("check_parabolicity: need at least 2 samples");

  ParabolicityReport report;
  report.sampled_range = range;
  report.samples = n;
  report.min_g = std::numeric_limits<double>::infinity();
  report.min_G_second = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double c = range.lo + (range.hi - range.lo) * static_cast<double>(i) / (n - 1);
    report.min_g = std::min(report.min_g, density.scaling_factor(c, 0));
    report.min_G_second = std::min(report.min_G_second, density.evaluate(c, 2));
  }
  report.g_positive = report.min_g > 0.0;
  report.G_second_positive = report.min_G_second > 0.0;
  return report;
}

}  // namespace scmcf
