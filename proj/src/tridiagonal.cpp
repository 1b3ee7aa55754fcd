#include "scmcf/tridiagonal.hpp"

#include "scmcf/error.hpp"

namespace scmcf {

namespace {

std::vector<double> thomas(std::span<const double> a, std::vector<double> b, std::span<const double> c,
                           std::vector<double> d) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

}  // namespace

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs,
                                      bool cyclic) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw InvalidArgument("solve_tridiagonal: size mismatch");
  }
  if (n == 0) return {};
  if (!cyclic || n < 3) {
    return thomas(lower, {diag.begin(), diag.end()}, upper, {rhs.begin(), rhs.end()});
  }

  // A = T + u v^T with u = (gamma, 0, ..., 0, upper[n-1]), v = (1, 0, ..., 0, lower[0] / gamma).
  const double gamma = -diag[0];
  std::vector<double> b(diag.begin(), diag.end());
  b[0] -= gamma;
  b[n - 1] -= upper[n - 1] * lower[0] / gamma;

  const auto y = thomas(lower, b, upper, {rhs.begin(), rhs.end()});
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = upper[n - 1];
  const auto z = thomas(lower, b, upper, u);

  const double fact = (y[0] + lower[0] * y[n - 1] / gamma) / (1.0 + z[0] + lower[0] * z[n - 1] / gamma);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - fact * z[i];
  return x;
}

}  // namespace scmcf
