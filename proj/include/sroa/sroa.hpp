#ifndef SROA_SROA_HPP_
#define SROA_SROA_HPP_

// Successive rank-one approximation: extract the best rank-one term of the
// current residual, subtract it, repeat.

#include "sroa/assignment.hpp"
#include "sroa/rank_one.hpp"
#include "sroa/tensor.hpp"

#include <algorithm>
#include <vector>

namespace sroa {

struct StepFlags {
  bool converged = true;
  bool degenerate = false;
  bool negative_weight = false;  ///< odd-order step returned lambda < 0
};

struct DecompositionResult {
  int order = 0;
  int dim = 0;
  std::vector<SpectralPair> pairs;
  std::vector<double> residual_frobenius;  ///< |T_i|_F after step i
  std::vector<double> stationarity;
  std::vector<StepFlags> flags;
  SymmetricTensor residual;  ///< T_k

  bool all_converged() const {
    return std::all_of(flags.begin(), flags.end(), [](const StepFlags& f) { return f.converged; });
  }
};

struct DecomposeOptions {
  /// Residuals with |T_i|_F <= stop_tol_rel * |T_0|_F count as zero: the next
  /// step is reported degenerate, or the loop ends when stop_early is set.
  double stop_tol_rel = 1e-10;
  bool stop_early = false;
};

inline DecompositionResult decompose(const SymmetricTensor& t_hat, int k, const SolverConfig& config,
                                     const DecomposeOptions& options = {}) {
  config.validate();
  detail::require(k >= 1 && k <= t_hat.dim(), "number of components must lie in [1, dim]");

  DecompositionResult out;
  out.order = t_hat.order();
  out.dim = t_hat.dim();
  const double floor = options.stop_tol_rel * frobenius_norm(t_hat);
  const bool odd = t_hat.order() % 2 == 1;

  SymmetricTensor residual = t_hat;
  for (int step = 0; step < k; ++step) {
    const double current = frobenius_norm(residual);
    if (options.stop_early && step > 0 && current <= floor) break;

    SolverConfig step_config = config;
    step_config.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(step)});
    step_config.degenerate_tol = std::max(config.degenerate_tol, floor);
    const RankOneResult r = best_rank_one(residual, step_config);

    StepFlags flags;
    flags.converged = r.converged;
    flags.degenerate = r.degenerate;
    flags.negative_weight = odd && !r.degenerate && r.pair.weight < 0.0;

    if (!r.degenerate) residual = axpy_rank_one(residual, -r.pair.weight, r.pair.vector);
    out.pairs.push_back(r.pair);
    out.residual_frobenius.push_back(frobenius_norm(residual));
    out.stationarity.push_back(r.stationarity_residual);
    out.flags.push_back(flags);
  }
  out.residual = std::move(residual);
  return out;
}

/// sum_i lambda_i v_i^{(x)p}.
inline SymmetricTensor reconstruct(const std::vector<SpectralPair>& pairs, int order, int dim) {
  SymmetricTensor out = SymmetricTensor::zeros(order, dim);
  for (const auto& pr : pairs) out = axpy_rank_one(out, pr.weight, pr.vector);
  return out;
}

inline SymmetricTensor reconstruct(const DecompositionResult& result) {
  detail::require(!result.pairs.empty(), "nothing to reconstruct");
  return reconstruct(result.pairs, result.order, result.dim);
}

/// Distance between unit vectors; with `sign_invariant`, min(|a-b|, |a+b|).
inline double vector_error(const Vector& truth, const Vector& estimate, bool sign_invariant) {
  const double direct = (truth - estimate).norm();
  return sign_invariant ? std::min(direct, (truth + estimate).norm()) : direct;
}

struct MatchReport {
  std::vector<int> permutation;  ///< permutation[j] = truth index of recovered pair j
  std::vector<double> weight_errors;
  std::vector<double> vector_errors;
};

/// Pair recovered components with ground truth by minimum total vector error.
inline MatchReport match_to_ground_truth(const std::vector<SpectralPair>& recovered,
                                         const std::vector<SpectralPair>& truth, bool even_mode) {
  detail::require(recovered.size() == truth.size(), "recovered and truth lists must have equal length");
  const int k = static_cast<int>(truth.size());
  Matrix cost(k, k);
  for (int j = 0; j < k; ++j)
    for (int t = 0; t < k; ++t) cost(j, t) = vector_error(truth[t].vector, recovered[j].vector, even_mode);

  MatchReport report;
  report.permutation = solve_assignment(cost);
  for (int j = 0; j < k; ++j) {
    const int t = report.permutation[j];
    report.weight_errors.push_back(std::abs(truth[t].weight - recovered[j].weight));
    report.vector_errors.push_back(cost(j, t));
  }
  return report;
}

inline MatchReport match_to_ground_truth(const DecompositionResult& result, const std::vector<SpectralPair>& truth,
                                         bool even_mode) {
  return match_to_ground_truth(result.pairs, truth, even_mode);
}

/// For Delta_i = lambda_pi(i) v_pi(i)^p - lambda_hat_i v_hat_i^p, returns
/// profile[i][j] = |sum_{i' <= i} Delta_i' v_j^{p-1}| for every truth index j
/// not among pi(1..i); entries for already-extracted j are set to -1.
inline std::vector<std::vector<double>> deflation_residual_profile(const std::vector<SpectralPair>& recovered,
                                                                   const std::vector<SpectralPair>& truth,
                                                                   const MatchReport& match, int order) {
  const std::size_t k = recovered.size();
  const std::size_t n_truth = truth.size();
  std::vector<std::vector<double>> profile;
  std::vector<Vector> acc(n_truth);
  for (auto& a : acc) a = Vector::Zero(truth.front().vector.size());
  std::vector<char> extracted(n_truth, 0);
  for (std::size_t i = 0; i < k; ++i) {
    const SpectralPair& tp = truth[static_cast<std::size_t>(match.permutation[i])];
    const SpectralPair& rp = recovered[i];
    extracted[static_cast<std::size_t>(match.permutation[i])] = 1;
    std::vector<double> row(n_truth, -1.0);
    for (std::size_t j = 0; j < n_truth; ++j) {
      const Vector& x = truth[j].vector;
      // (lambda u^p) x^{p-1} = lambda <u, x>^{p-1} u
      acc[j] += tp.weight * std::pow(tp.vector.dot(x), order - 1) * tp.vector -
                rp.weight * std::pow(rp.vector.dot(x), order - 1) * rp.vector;
      if (!extracted[j]) row[j] = acc[j].norm();
    }
    profile.push_back(std::move(row));
  }
  return profile;
}

}  // namespace sroa

#endif  // SROA_SROA_HPP_
