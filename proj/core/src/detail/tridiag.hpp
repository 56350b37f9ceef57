#pragma once

#include <cstddef>
#include <vector>

namespace kflow::detail {

/// Thomas algorithm for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[m-1] are ignored. Overwrites `rhs` with the solution.
inline void solve_tridiagonal(const std::vector<double>& lower, std::vector<double> diag,
                              const std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t m = diag.size();
  for (std::size_t i = 1; i < m; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[m - 1] /= diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace kflow::detail
