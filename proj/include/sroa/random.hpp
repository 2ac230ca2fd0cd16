#ifndef SROA_RANDOM_HPP_
#define SROA_RANDOM_HPP_

#include "sroa/tensor.hpp"

#include <Eigen/QR>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sroa {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent stream seed from a master seed and a path of labels
/// (trial index, model kind, step, ...). Order matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t label : path) s = mix64(s ^ mix64(label + 0x632be59bd9b4e019ULL));
  return s;
}

inline Vector gaussian_vector(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

/// Uniform draw from the unit sphere (normalized Gaussian).
inline Vector random_unit_vector(Rng& rng, int dim) {
  Vector v = gaussian_vector(rng, dim);
  double norm = v.norm();
  while (norm == 0.0) {
    v = gaussian_vector(rng, dim);
    norm = v.norm();
  }
  return v / norm;
}

/// n x n orthonormal matrix from the QR factorization of a Gaussian matrix,
/// with column signs fixed so the distribution is Haar.
inline Matrix random_orthonormal(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace sroa

#endif  // SROA_RANDOM_HPP_
