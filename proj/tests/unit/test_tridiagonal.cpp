#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "scmcf/tridiagonal.hpp"

using scmcf::solve_tridiagonal;

namespace {

std::vector<double> apply(const std::vector<double>& lo, const std::vector<double>& di, const std::vector<double>& up,
                          const std::vector<double>& x, bool cyclic) {
  const std::size_t n = x.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = di[i] * x[i];
    if (i > 0) y[i] += lo[i] * x[i - 1];
    else if (cyclic) y[i] += lo[i] * x[n - 1];
    if (i + 1 < n) y[i] += up[i] * x[i + 1];
    else if (cyclic) y[i] += up[i] * x[0];
  }
  return y;
}

}  // namespace

TEST_CASE("open and cyclic systems reproduce a known solution") {
  for (bool cyclic : {false, true}) {
    const std::size_t n = 37;
    std::vector<double> lo(n), di(n), up(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = -1.0 - 0.1 * std::sin(i);
      up[i] = -1.0 + 0.05 * std::cos(3.0 * i);
      di[i] = 4.0 + 0.3 * std::sin(0.7 * i);
      x[i] = std::cos(0.2 * i) + 0.5;
    }
    const auto b = apply(lo, di, up, x, cyclic);
    const auto sol = solve_tridiagonal(lo, di, up, b, cyclic);
    for (std::size_t i = 0; i < n; ++i) CHECK(sol[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("identity") {
  std::vector<double> z(5, 0.0), one(5, 1.0), rhs{1, 2, 3, 4, 5};
  const auto sol = solve_tridiagonal(z, one, z, rhs, true);
  CHECK(sol == rhs);
}
