#pragma once

#include <span>
#include <vector>

namespace scmcf {

/// Row i reads lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1] = rhs[i].
///
/// With cyclic == true, lower[0] couples to x[n-1] and upper[n-1] to x[0]
/// (Sherman-Morrison on top of the Thomas algorithm). Otherwise lower[0] and
/// upper[n-1] are ignored. Assumes a diagonally dominant matrix; no pivoting.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs,
                                      bool cyclic);

}  // namespace scmcf
