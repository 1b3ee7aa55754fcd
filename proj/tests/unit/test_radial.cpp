#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "scmcf/error.hpp"
#include "scmcf/radial.hpp"

using namespace scmcf;
using namespace scmcf::radial;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("unit sphere areas") {
  CHECK(unit_sphere_area(1) == Approx(2.0 * kPi));
  CHECK(unit_sphere_area(2) == Approx(4.0 * kPi));
  CHECK(unit_sphere_area(3) == Approx(2.0 * kPi * kPi));
}

TEST_CASE("concentration of a sphere") {
  CHECK(radial_concentration(2.0 * kPi, 1, 1.0) == Approx(1.0));
  CHECK(radial_concentration(4.0 * kPi, 2, 1.0) == Approx(1.0));
  CHECK(radial_concentration(2.0 * kPi, 1, 2.0) == Approx(0.5));
  CHECK_THROWS_AS(radial_concentration(1.0, 1, 0.0), DomainError);
  CHECK_THROWS_AS(radial_concentration(1.0, 1, -1.0), DomainError);
  const auto s = make_state(4.0 * kPi, 2, 0.5);
  CHECK(s.concentration() == Approx(4.0));
}

TEST_CASE("radius velocity") {
  const auto one = EnergyDensity::constant(1.0);
  CHECK(radial_rhs(one, 2.0 * kPi, 1, 2.0) == Approx(-0.5));
  CHECK(radial_rhs(one, 4.0 * kPi, 2, 1.0) == Approx(-2.0));
  const auto G = make_power_law(-1.0, 1.0);
  CHECK(radial_rhs(G, 2.0 * kPi, 1, 1.0) == Approx(-1.0));
  CHECK(radial_rhs(G, 2.0 * kPi, 1, 1.0) == Approx(-G.scaling_factor(1.0)));
}

TEST_CASE("separation oracle closed forms") {
  const auto one = EnergyDensity::constant(1.0);
  CHECK(separation_oracle(one, 2.0 * kPi, 1, 1.0, 0.0) == Approx(0.5).epsilon(1e-10));
  CHECK(separation_oracle(one, 2.0 * kPi, 1, 1.0, 1.0) == 0.0);
  CHECK(separation_oracle(one, 4.0 * kPi, 2, 1.0, 0.0) == Approx(0.25).epsilon(1e-10));
  for (double R : {0.9, 0.5, 0.1}) {
    CHECK(separation_oracle(one, 2.0 * kPi, 1, 1.0, R) == Approx((1.0 - R * R) / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("separation oracle is strictly decreasing in R") {
  const auto G = make_power_law(-1.5, 0.5);
  double prev = separation_oracle(G, 2.0 * kPi, 1, 2.0, 0.05);
  for (double R = 0.1; R <= 2.0; R += 0.05) {
    const double F = separation_oracle(G, 2.0 * kPi, 1, 2.0, R);
    CHECK(F < prev);
    prev = F;
  }
}

TEST_CASE("extinction times") {
  const auto one = EnergyDensity::constant(1.0);
  auto r = extinction_time(one, 2.0 * kPi, 1, 1.0);
  REQUIRE(r.finite());
  CHECK(std::abs(r.T - 0.5) < 1e-8);
  r = extinction_time(one, 4.0 * kPi, 2, 1.0);
  REQUIRE(r.finite());
  CHECK(std::abs(r.T - 0.25) < 1e-8);

  CHECK_FALSE(extinction_time(make_power_law(-3.0, 1.0), 2.0 * kPi, 1, 1.0).finite());
  CHECK(std::isinf(extinction_time(make_power_law(-3.0, 1.0), 2.0 * kPi, 1, 1.0).T));

  r = extinction_time(make_power_law(-1.0, 1.0), 2.0 * kPi, 1, 1.0);
  REQUIRE(r.finite());
  CHECK(r.T == Approx(1.0).epsilon(1e-9));

  ExtinctionOptions generic;
  generic.power_law_fast_path = false;
  r = extinction_time(make_power_law(-1.0, 1.0), 2.0 * kPi, 1, 1.0, generic);
  REQUIRE(r.finite());
  CHECK(r.T == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("divergence boundary s d + 2 <= 0") {
  ExtinctionOptions generic;
  generic.power_law_fast_path = false;
  for (int d : {1, 2}) {
    for (double s : {-3.0, -2.5, -2.1, -2.0, -1.9, -1.5, -1.0, -0.9, -0.5}) {
      const bool divergent = s * d + 2.0 <= 0.0;
      const double m = unit_sphere_area(d);
      CHECK(extinction_time(make_power_law(s, 1.0), m, d, 1.0).finite() == !divergent);
      INFO("s=" << s << " d=" << d);
      CHECK(extinction_time(make_power_law(s, 1.0), m, d, 1.0, generic).finite() == !divergent);
    }
  }
}

TEST_CASE("generic quadrature agrees with the closed form where finite") {
  ExtinctionOptions generic;
  generic.power_law_fast_path = false;
  for (double s : {-0.5, 0.5, 2.0}) {
    const auto G = make_power_law(s, 0.0);
    const auto fast = extinction_time(G, 3.0, 1, 1.3);
    const auto slow = extinction_time(G, 3.0, 1, 1.3, generic);
    REQUIRE(fast.finite());
    REQUIRE(slow.finite());
    CHECK(slow.T == Approx(fast.T).epsilon(1e-8));
  }
}

TEST_CASE("non-parabolic density is rejected") {
  Tabulated t;
  // G = c^2 gives g = G - G' c = -c^2.
  t.derivatives = {[](double c) { return c * c; }, [](double c) { return 2 * c; }, [](double) { return 2.0; },
                   [](double) { return 0.0; }};
  const auto bad = EnergyDensity::tabulated(t, Interval{0.0, 1e300});
  CHECK_THROWS_AS(extinction_time(bad, 2.0 * kPi, 1, 1.0), ParabolicityError);
}

TEST_CASE("radial ODE matches the closed form") {
  const auto one = EnergyDensity::constant(1.0);
  for (int d : {1, 2}) {
    const auto traj = solve_radial(one, unit_sphere_area(d), d, 1.0, 0.2, 0.01);
    CHECK_FALSE(traj.extinction_time);
    for (const auto& p : traj.points) CHECK(std::abs(p.R - std::sqrt(1.0 - 2.0 * d * p.t)) < 1e-6);
  }
  const auto t03 = solve_radial(one, 2.0 * kPi, 1, 1.0, 0.3, 0.3);
  CHECK(std::abs(t03.points.back().R - std::sqrt(0.4)) < 1e-6);
  CHECK(t03.points.front().t == 0.0);
  CHECK(t03.points.front().R == 1.0);
}

TEST_CASE("radial ODE agrees with the separation oracle") {
  for (const auto& G : {make_power_law(-1.0, 1.0), make_power_law(-0.5, 0.2), make_power_law(1.5, 0.0)}) {
    const double m = 2.0 * kPi;
    const auto traj = solve_radial(G, m, 1, 1.0, 0.3, 0.02);
    for (const auto& p : traj.points) {
      CHECK(std::abs(separation_oracle(G, m, 1, 1.0, p.R) - p.t) < 1e-6);
      CHECK(radial_concentration(m, 1, p.R) * unit_sphere_area(1) * p.R == Approx(m).epsilon(1e-12));
    }
  }
}

TEST_CASE("infinite lifetime and extinction reporting") {
  const auto slow = solve_radial(make_power_law(-3.0, 1.0), 2.0 * kPi, 1, 1.0, 10.0, 1.0);
  CHECK_FALSE(slow.extinction_time);
  CHECK(slow.points.back().R > 0.0);

  const auto fast = solve_radial(EnergyDensity::constant(1.0), 2.0 * kPi, 1, 1.0, 1.0, 0.1);
  REQUIRE(fast.extinction_time);
  CHECK(*fast.extinction_time == Approx(0.5).epsilon(1e-4));
}
