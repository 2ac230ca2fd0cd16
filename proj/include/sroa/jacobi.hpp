#ifndef SROA_JACOBI_HPP_
#define SROA_JACOBI_HPP_

#include "sroa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sroa {

struct SymmetricEigen {
  Vector values;   ///< descending
  Matrix vectors;  ///< column i pairs with values[i]
  int sweeps = 0;
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Sweeps until the off-diagonal mass falls below rel_tol * |A|_F.
inline SymmetricEigen jacobi_eigen(const Matrix& input, int max_sweeps = 100, double rel_tol = 1e-15) {
  detail::require(input.rows() == input.cols(), "matrix must be square");
  detail::require((input - input.transpose()).cwiseAbs().maxCoeff() <=
                      1e-12 * std::max(1.0, input.cwiseAbs().maxCoeff()),
                  "matrix must be symmetric");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && off_norm() > rel_tol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that zeroes a(p, q); smaller root for stability.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

/// Spectral norm of a symmetric matrix.
inline double symmetric_spectral_norm(const Matrix& m) {
  const auto eig = jacobi_eigen(m);
  return eig.values.cwiseAbs().maxCoeff();
}

}  // namespace sroa

#endif  // SROA_JACOBI_HPP_
