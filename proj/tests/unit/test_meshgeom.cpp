#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scmcf/error.hpp"
#include "scmcf/meshgeom.hpp"
#include "shapes.hpp"

using namespace scmcf;
using doctest::Approx;
using shapes::kPi;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double ellipse_error(std::size_t n) {
  const double a = 2.0, b = 1.0;
  const auto m = shapes::ellipse(a, b, n);
  const auto f = curve_geometry(m);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    err = std::max(err, std::abs(f.H[i] + shapes::ellipse_curvature(a, b, t)));
  }
  return err;
}

double spheroid_H_error(std::size_t n) {
  const double a = 1.5, b = 1.0;
  const auto p = shapes::spheroid(a, b, n);
  const auto f = revolution_geometry(p);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = shapes::kPi * i / (n - 1);
    err = std::max(err, std::abs(f.H[i] - shapes::spheroid_mean_curvature(a, b, t)));
  }
  return err;
}

double circle_lb_error(std::size_t n) {
  const auto m = shapes::circle(1.0, n);
  std::vector<double> f(n), ex(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    f[i] = std::cos(3.0 * t);
    ex[i] = -9.0 * std::cos(3.0 * t);
  }
  return max_abs_diff(laplace_beltrami(f, m), ex);
}

double sphere_lb_error(std::size_t n) {
  // The height function x is an eigenfunction: Delta x = -2 x on the unit sphere.
  const auto p = shapes::sphere(1.0, n);
  std::vector<double> ex(n);
  for (std::size_t i = 0; i < n; ++i) ex[i] = -2.0 * p.x[i];
  return max_abs_diff(laplace_beltrami(p.x, p), ex);
}

double wavy_lb_error(std::size_t n) {
  // w = 1 + 0.3 sin x, f = cos x; exact value from the conservative axisymmetric formula.
  const auto p = shapes::periodic([](double x) { return 1.0 + 0.3 * std::sin(x); }, 2.0 * kPi, n);
  std::vector<double> f(n), ex(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = p.x[i];
    const double w = 1.0 + 0.3 * std::sin(x), wx = 0.3 * std::cos(x), wxx = -0.3 * std::sin(x);
    const double q = 1.0 + wx * wx;
    f[i] = std::cos(x);
    // (1/(w sqrt q)) d/dx (w f_x / sqrt q)
    const double fx = -std::sin(x), fxx = -std::cos(x);
    const double flux_x = (wx * fx + w * fxx) / std::sqrt(q) - w * fx * wx * wxx / std::pow(q, 1.5);
    ex[i] = flux_x / (w * std::sqrt(q));
  }
  return max_abs_diff(laplace_beltrami(f, p), ex);
}

template <class F>
void check_second_order(F error) {
  const double e1 = error(64), e2 = error(128), e3 = error(256);
  INFO("errors " << e1 << " " << e2 << " " << e3);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
  CHECK(e2 / e3 > 3.5);
  CHECK(e2 / e3 < 4.5);
}

}  // namespace

TEST_CASE("circle curvature sign follows the orientation") {
  auto out = curve_geometry(shapes::circle(1.0, 256));
  for (double h : out.H) CHECK(h == Approx(-1.0).epsilon(1e-3));
  auto in = curve_geometry(shapes::circle(1.0, 256, Orientation::NormalLeftOfTangent));
  for (double h : in.H) CHECK(h == Approx(1.0).epsilon(1e-3));
  auto big = curve_geometry(shapes::circle(2.0, 512));
  for (double h : big.H) CHECK(std::abs(h + 0.5) < 1e-3);
}

TEST_CASE("normals are unit length and outward") {
  const auto m = shapes::ellipse(1.5, 0.7, 200);
  const auto f = curve_geometry(m);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(norm(f.normal[i]) == Approx(1.0).epsilon(1e-12));
    CHECK(dot(f.normal[i], m.nodes[i]) > 0.0);
  }
}

TEST_CASE("sphere mean curvature") {
  const auto f = revolution_geometry(shapes::sphere(2.0, 129));
  for (double h : f.H) CHECK(h == Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("plateau curvature") {
  for (double r : {1.0, 2.0}) {
    const auto f = revolution_geometry(shapes::cylinder(r, 1.0, 32));
    for (double h : f.H) CHECK(h == Approx(-1.0 / r).epsilon(1e-12));
  }
}

TEST_CASE("graph form of the mean curvature on a hemisphere") {
  RevolutionProfile p;
  const std::size_t n = 201;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -0.8 + 1.6 * i / (n - 1);
    p.x.push_back(x);
    p.w.push_back(std::sqrt(1.0 - x * x));
  }
  p.closure = Closure::Periodic;
  p.period = 10.0;
  const auto H = graph_mean_curvature(p);
  for (std::size_t i = 1; i + 1 < n; ++i) CHECK(std::abs(H[i] + 2.0) < 1e-3);

  const auto capped = shapes::sphere(1.0, 65);
  const auto Hc = graph_mean_curvature(capped);
  CHECK(std::isnan(Hc.front()));
  CHECK(std::isnan(Hc.back()));
}

TEST_CASE("normal velocity of a surface of revolution") {
  const std::vector<double> dw{-0.5, std::sqrt(2.0), 0.0};
  const std::vector<double> wx{0.0, 1.0, 7.0};
  const auto V = normal_velocity_revolution(dw, wx);
  CHECK(V[0] == Approx(-0.5));
  CHECK(V[1] == Approx(1.0));
  CHECK(V[2] == 0.0);
}

TEST_CASE("laplace-beltrami of a constant vanishes") {
  const auto m = shapes::ellipse(2.0, 1.0, 90);
  for (double v : laplace_beltrami(std::vector<double>(90, 3.0), m)) CHECK(std::abs(v) < 1e-12);
  const auto s = shapes::sphere(1.0, 41);
  for (double v : laplace_beltrami(std::vector<double>(41, 3.0), s)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("surface integrals") {
  const auto c = shapes::circle(1.0, 1024);
  CHECK(std::abs(surface_integral(std::vector<double>(1024, 1.0), c) - 2.0 * kPi) < 1e-4);
  CHECK(surface_integral(std::vector<double>(1024, 0.3), shapes::circle(2.5, 1024)) ==
        Approx(2.0 * kPi * 2.5 * 0.3).epsilon(1e-4));
  const auto cyl = shapes::cylinder(1.0, 1.0, 64);
  CHECK(std::abs(surface_integral(std::vector<double>(64, 1.0), cyl) - 2.0 * kPi) < 1e-3);
  const auto s = shapes::sphere(1.0, 401);
  CHECK(total_area(s) == Approx(4.0 * kPi).epsilon(1e-4));
}

TEST_CASE("turning number identity for outward curves") {
  const auto m = shapes::ellipse(3.0, 1.0, 400);
  const auto f = curve_geometry(m);
  CHECK(surface_integral(f.H, m) == Approx(-2.0 * kPi).epsilon(1e-4));
}

TEST_CASE("discrete Gauss identity") {
  for (std::size_t n : {64u, 256u}) {
    const auto m = shapes::ellipse(2.0, 1.0, n);
    std::vector<double> f(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2.0 * kPi * i / n;
      f[i] = std::sin(2.0 * t) + 0.3 * std::cos(t);
      g[i] = std::exp(std::cos(t));
    }
    const auto lf = laplace_beltrami(f, m);
    std::vector<double> glf(n);
    for (std::size_t i = 0; i < n; ++i) glf[i] = g[i] * lf[i];
    const double lhs = surface_integral(glf, m) + dirichlet_pairing(f, g, m);
    CHECK(std::abs(lhs) < 10.0 / n);
    CHECK(std::abs(surface_integral(lf, m)) < 1e-10);
  }
}

TEST_CASE("second-order convergence") {
  SUBCASE("ellipse curvature") { check_second_order(ellipse_error); }
  SUBCASE("spheroid mean curvature including the poles") { check_second_order(spheroid_H_error); }
  SUBCASE("circle laplace-beltrami") { check_second_order(circle_lb_error); }
  SUBCASE("sphere laplace-beltrami") { check_second_order(sphere_lb_error); }
  SUBCASE("wavy periodic laplace-beltrami") { check_second_order(wavy_lb_error); }
}

TEST_CASE("mesh validation") {
  CHECK_THROWS_AS(validate(shapes::circle(1.0, 6)), MeshQualityError);
  auto dup = shapes::circle(1.0, 16);
  dup.nodes[3] = dup.nodes[4];
  CHECK_THROWS_AS(validate(dup), MeshQualityError);
  auto sizes = shapes::circle(1.0, 16);
  sizes.concentration.pop_back();
  CHECK_THROWS_AS(validate(sizes), MeshQualityError);

  auto cap = shapes::sphere(1.0, 17);
  cap.w.back() = 0.1;
  CHECK_THROWS_AS(validate(cap), MeshQualityError);
  auto pinched = shapes::sphere(1.0, 17);
  pinched.w[8] = 0.0;
  CHECK_THROWS_AS(validate(pinched), DegeneracyError);
  auto unordered = shapes::sphere(1.0, 17);
  std::swap(unordered.x[4], unordered.x[5]);
  CHECK_THROWS(validate(unordered));
}
