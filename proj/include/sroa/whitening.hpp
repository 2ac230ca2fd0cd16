#ifndef SROA_WHITENING_HPP_
#define SROA_WHITENING_HPP_

// Moment whitening for a single-topic mixture model.
//
// With topic weights w_i and word distributions mu_i (d-dimensional),
//   M2 = sum_i w_i mu_i mu_i^T,   Mp = sum_i w_i mu_i^{(x)p}.
// Whitening by W = U D^{-1/2} (from the rank-n eigendecomposition of M2) turns
// Mp into the orthogonally decomposable tensor
//   Mp(W, ..., W) = sum_i lambda_i v_i^{(x)p},
//   lambda_i = w_i^{1 - p/2},   v_i = sqrt(w_i) W^T mu_i,
// and the parameters come back as w = lambda^{2/(2-p)}, mu = lambda (W^T)^+ v.

#include "sroa/jacobi.hpp"
#include "sroa/random.hpp"
#include "sroa/sroa.hpp"
#include "sroa/tensor.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sroa {

struct TopicModelParams {
  Vector weights;       ///< w, length n
  Matrix topic_vectors; ///< d x n, column i is mu_i

  int topics() const { return static_cast<int>(weights.size()); }
  int vocabulary() const { return static_cast<int>(topic_vectors.rows()); }

  void validate() const {
    const int n = topics();
    detail::require(n >= 1, "need at least one topic");
    detail::require(topic_vectors.cols() == n, "one topic vector per weight");
    detail::require(vocabulary() >= n, "vocabulary size must be at least the number of topics");
    detail::require(std::abs(weights.sum() - 1.0) <= 1e-12, "topic weights must sum to 1");
    detail::require((weights.array() > 0.0).all(), "topic weights must be positive");
    for (int i = 0; i < n; ++i) {
      detail::require((topic_vectors.col(i).array() >= 0.0).all(), "topic vectors must be non-negative");
      detail::require(std::abs(topic_vectors.col(i).sum() - 1.0) <= 1e-12, "topic vectors must sum to 1");
    }
  }
};

struct MomentPair {
  Matrix m2;
  SymmetricTensor mp;
  bool rank_deficient = false;
};

class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(int numerical_rank, int requested)
      : std::runtime_error("second moment is rank deficient: numerical rank " + std::to_string(numerical_rank) +
                           " < " + std::to_string(requested) + " requested components"),
        numerical_rank_(numerical_rank) {}
  int numerical_rank() const { return numerical_rank_; }

 private:
  int numerical_rank_;
};

inline int numerical_rank(const Vector& descending_eigenvalues, double rank_tol_rel) {
  const double cutoff = rank_tol_rel * std::max(0.0, descending_eigenvalues[0]);
  int r = 0;
  for (Eigen::Index i = 0; i < descending_eigenvalues.size(); ++i) r += descending_eigenvalues[i] > cutoff ? 1 : 0;
  return r;
}

/// Exact population moments of the model.
inline MomentPair synthesize_moments(const TopicModelParams& params, int order) {
  params.validate();
  detail::require(order >= 3, "moment tensor order must be at least 3");
  const int d = params.vocabulary();
  const int n = params.topics();
  MomentPair out;
  out.m2 = Matrix::Zero(d, d);
  std::vector<double> mp(detail::checked_pow(d, order), 0.0);
  for (int i = 0; i < n; ++i) {
    const Vector mu = params.topic_vectors.col(i);
    out.m2 += params.weights[i] * mu * mu.transpose();
    const auto term = detail::outer_power(params.weights[i], mu, order);
    for (std::size_t k = 0; k < mp.size(); ++k) mp[k] += term[k];
  }
  out.m2 = 0.5 * (out.m2 + out.m2.transpose()).eval();
  out.mp = SymmetricTensor::from_symmetric_data(order, d, std::move(mp));
  out.rank_deficient = numerical_rank(jacobi_eigen(out.m2).values, 1e-10) < n;
  return out;
}

/// W = U D^{-1/2} from the top-n eigenpairs of M2, so that W^T M2 W = I.
inline Matrix compute_whitener(const Matrix& m2, int n, double rank_tol_rel = 1e-10) {
  detail::require(m2.rows() == m2.cols(), "second moment must be square");
  detail::require(n >= 1, "need at least one component");
  if (m2.rows() < n) throw RankDeficientError(static_cast<int>(m2.rows()), n);
  const SymmetricEigen eig = jacobi_eigen(m2);
  const int rank = numerical_rank(eig.values, rank_tol_rel);
  if (rank < n) throw RankDeficientError(rank, n);
  Matrix w(m2.rows(), n);
  for (int i = 0; i < n; ++i) w.col(i) = eig.vectors.col(i) / std::sqrt(eig.values[i]);
  return w;
}

struct WhitenedDecomposition {
  DecompositionResult result;
  Matrix whitener;
  SymmetricTensor whitened;
};

inline WhitenedDecomposition whiten_and_decompose(const MomentPair& moments, int n, const SolverConfig& config) {
  detail::require(moments.m2.rows() == moments.mp.dim(), "moment dimensions disagree");
  WhitenedDecomposition out;
  out.whitener = compute_whitener(moments.m2, n);
  out.whitened = multilinear_transform(moments.mp, out.whitener);
  out.result = decompose(out.whitened, n, config);
  return out;
}

struct RecoveredParams {
  Vector weights;        ///< w_j = lambda_j^{2/(2-p)}, in decomposition order
  Matrix topic_vectors;  ///< d x n, clipped at 0 and renormalized
  double clip_mass = 0.0;
  std::vector<bool> failed;  ///< lambda_j <= 0: component not recoverable
};

inline RecoveredParams recover_parameters(const DecompositionResult& result, const Matrix& whitener) {
  const int p = result.order;
  detail::require(p >= 3, "recovery needs tensor order at least 3");
  const int n = static_cast<int>(result.pairs.size());
  const Matrix pinv = whitener.transpose().completeOrthogonalDecomposition().pseudoInverse();

  RecoveredParams out;
  out.weights = Vector::Zero(n);
  out.topic_vectors = Matrix::Zero(whitener.rows(), n);
  out.failed.assign(static_cast<std::size_t>(n), false);
  for (int j = 0; j < n; ++j) {
    const SpectralPair& pr = result.pairs[static_cast<std::size_t>(j)];
    if (!(pr.weight > 0.0)) {
      out.failed[static_cast<std::size_t>(j)] = true;
      continue;
    }
    out.weights[j] = std::pow(pr.weight, 2.0 / (2.0 - p));
    Vector mu = pr.weight * (pinv * pr.vector);
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      if (mu[i] < 0.0) {
        out.clip_mass += -mu[i];
        mu[i] = 0.0;
      }
    }
    const double total = mu.sum();
    if (total > 0.0) {
      out.topic_vectors.col(j) = mu / total;
    } else {
      out.failed[static_cast<std::size_t>(j)] = true;
    }
  }
  return out;
}

/// Random model: weights and topic vectors from normalized U(0.2, 1) draws.
inline TopicModelParams random_topic_model(int n, int d, std::uint64_t seed) {
  detail::require(n >= 1 && d >= n, "need d >= n >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  TopicModelParams params;
  params.weights.resize(n);
  for (int i = 0; i < n; ++i) params.weights[i] = u(rng);
  params.weights /= params.weights.sum();
  params.topic_vectors.resize(d, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) params.topic_vectors(k, i) = u(rng);
    params.topic_vectors.col(i) /= params.topic_vectors.col(i).sum();
  }
  return params;
}

/// Ground-truth pairs of the whitened tensor for a given whitener.
inline std::vector<SpectralPair> whitened_truth(const TopicModelParams& params, const Matrix& whitener, int order) {
  std::vector<SpectralPair> out;
  for (int i = 0; i < params.topics(); ++i) {
    const double w = params.weights[i];
    Vector v = std::sqrt(w) * (whitener.transpose() * params.topic_vectors.col(i));
    out.push_back({std::pow(w, 1.0 - order / 2.0), v.normalized()});
  }
  return out;
}

struct ParamRecoveryError {
  std::vector<int> permutation;  ///< recovered j -> true topic
  double max_weight_error = 0.0;
  double max_topic_error = 0.0;  ///< Euclidean
};

/// Match recovered topics to the truth by minimum total topic-vector distance.
inline ParamRecoveryError compare_parameters(const RecoveredParams& recovered, const TopicModelParams& truth) {
  const int n = truth.topics();
  detail::require(recovered.weights.size() == n, "topic counts differ");
  Matrix cost(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cost(j, i) = (recovered.topic_vectors.col(j) - truth.topic_vectors.col(i)).norm();
  ParamRecoveryError out;
  out.permutation = solve_assignment(cost);
  for (int j = 0; j < n; ++j) {
    const int i = out.permutation[static_cast<std::size_t>(j)];
    out.max_weight_error = std::max(out.max_weight_error, std::abs(recovered.weights[j] - truth.weights[i]));
    out.max_topic_error = std::max(out.max_topic_error, cost(j, i));
  }
  return out;
}

}  // namespace sroa

#endif  // SROA_WHITENING_HPP_
