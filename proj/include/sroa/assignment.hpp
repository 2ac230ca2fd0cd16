#ifndef SROA_ASSIGNMENT_HPP_
#define SROA_ASSIGNMENT_HPP_

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(k^3) shortest-augmenting-path form with row/column potentials).

#include "sroa/tensor.hpp"

#include <limits>
#include <vector>

namespace sroa {

/// Returns `assign` with assign[row] = column, minimizing sum cost(row, assign[row]).
inline std::vector<int> solve_assignment(const Matrix& cost) {
  detail::require(cost.rows() == cost.cols(), "assignment needs a square cost matrix");
  const int k = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based internals; column 0 is a sentinel.
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> match(k + 1, 0), way(k + 1, 0);
  for (int row = 1; row <= k; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[col0] = 1;
      const int r = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int c = 1; c <= k; ++c) {
        if (used[c]) continue;
        const double cur = cost(r - 1, c - 1) - u[r] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (int c = 0; c <= k; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<int> assign(k, -1);
  for (int c = 1; c <= k; ++c) assign[match[c] - 1] = c - 1;
  return assign;
}

}  // namespace sroa

#endif  // SROA_ASSIGNMENT_HPP_
