#pragma once

// Test-only dense simplex oracle: maximize c^T x subject to A x <= b with
// free variables and b >= 0.  Free x splits into x = u - v with u, v >= 0;
// slacks give an immediate feasible basis, so one phase suffices.  Bland's
// rule keeps the tiny instances cycle-free.  Deliberately independent of the
// library's flow-based metric solver.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lp_oracle {

inline double solve_lp_max(const std::vector<std::vector<double>>& A,
                           const std::vector<double>& b,
                           const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  for (double bi : b)
    if (bi < 0.0) throw std::invalid_argument("lp oracle: needs b >= 0");
  const std::size_t cols = 2 * n + m;  // u, v, slacks

  // Tableau rows: [coefficients | rhs]; last row = -objective.
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T[i][j] = A[i][j];
      T[i][n + j] = -A[i][j];
    }
    T[i][2 * n + i] = 1.0;
    T[i][cols] = b[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    T[m][j] = -c[j];
    T[m][n + j] = c[j];
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = 2 * n + i;

  const double tol = 1e-11;
  for (std::size_t iter = 0; iter < 200000; ++iter) {
    // Bland: first column with negative reduced cost.
    std::size_t pivot_col = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (T[m][j] < -tol) {
        pivot_col = j;
        break;
      }
    }
    if (pivot_col == cols) return T[m][cols];  // optimal

    // Ratio test, Bland tie-break on basis index.
    std::size_t pivot_row = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (T[i][pivot_col] > tol) {
        const double ratio = T[i][cols] / T[i][pivot_col];
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (pivot_row == m || basis[i] < basis[pivot_row]))) {
          best_ratio = ratio;
          pivot_row = i;
        }
      }
    }
    if (pivot_row == m)
      throw std::runtime_error("lp oracle: unbounded instance");

    const double pv = T[pivot_row][pivot_col];
    for (std::size_t j = 0; j <= cols; ++j) T[pivot_row][j] /= pv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == pivot_row) continue;
      const double f = T[i][pivot_col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j)
        T[i][j] -= f * T[pivot_row][j];
    }
    basis[pivot_row] = pivot_col;
  }
  throw std::runtime_error("lp oracle: iteration cap hit");
}

}  // namespace lp_oracle
