#ifndef SROA_PERTURBATION_HPP_
#define SROA_PERTURBATION_HPP_

// Nearly orthogonally decomposable test instances and the perturbation bounds
// they are checked against.
//
// For T_hat = sum_i lambda_i v_i^p + E with orthonormal v_i and eps = |E|:
//   first step (odd p):  |lambda_hat - lambda_j| <= eps,
//                        |x_hat - v_j| <= 10 (eps/lambda_j + (eps/lambda_j)^2)
//   full decomposition:  |lambda_pi(j) - lambda_hat_j| <= 2 eps,
//                        |v_pi(j) - v_hat_j| <= 20 eps / |lambda_pi(j)|
//   symmetric matrices:  |lambda_hat - lambda_1| <= eps,
//                        <x_hat, v_1>^2 >= 1 - (2 eps / gap)^2
// Bound values are exact functions of (eps, lambda); a violation is
// measured > bound with no slack.

#include "sroa/jacobi.hpp"
#include "sroa/random.hpp"
#include "sroa/rank_one.hpp"
#include "sroa/sroa.hpp"
#include "sroa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sroa {

enum class NoiseKind { binary, uniform, gaussian };

inline std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::binary: return "binary";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::gaussian: return "gaussian";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "binary") return NoiseKind::binary;
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "gaussian") return NoiseKind::gaussian;
  throw std::invalid_argument("unknown perturbation model: " + std::string(name));
}

/// Entry distribution of a perturbation: binary {+-sigma}, uniform
/// [-2 sigma, 2 sigma], or gaussian N(0, sigma^2).
struct PerturbationModel {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 0.01;
};

struct GroundTruth {
  std::vector<double> weights;
  Matrix basis;  ///< column i is v_i

  int dim() const { return static_cast<int>(basis.rows()); }

  std::vector<SpectralPair> pairs() const {
    std::vector<SpectralPair> out;
    for (std::size_t i = 0; i < weights.size(); ++i)
      out.push_back({weights[i], basis.col(static_cast<Eigen::Index>(i))});
    return out;
  }

  double min_abs_weight() const {
    double m = std::abs(weights.front());
    for (double w : weights) m = std::min(m, std::abs(w));
    return m;
  }
};

enum class BasisMode { identity, random_orthonormal };

struct SodInstance {
  SymmetricTensor tensor;
  GroundTruth truth;
};

/// T = sum_i lambda_i v_i^p. Negative weights are only meaningful for even p.
inline SodInstance generate_sod(int n, int p, const std::vector<double>& weights, BasisMode basis_mode,
                                std::uint64_t seed) {
  detail::require(static_cast<int>(weights.size()) == n, "need one weight per dimension");
  for (double w : weights) detail::require(w != 0.0 && std::isfinite(w), "weights must be finite and nonzero");
  if (p % 2 == 1) {
    for (double w : weights) detail::require(w > 0.0, "odd-order ground truth needs positive weights");
  }
  Matrix basis = Matrix::Identity(n, n);
  if (basis_mode == BasisMode::random_orthonormal) {
    Rng rng(seed);
    basis = random_orthonormal(rng, n);
  }
  SymmetricTensor t = SymmetricTensor::zeros(p, n);
  for (int i = 0; i < n; ++i) t = axpy_rank_one(t, weights[static_cast<std::size_t>(i)], basis.col(i));
  return {std::move(t), {weights, std::move(basis)}};
}

/// Symmetric perturbation: one i.i.d. draw per sorted index tuple (in
/// lexicographic order), copied to every permutation of that tuple.
inline SymmetricTensor generate_perturbation(const PerturbationModel& model, int n, int p, std::uint64_t seed) {
  detail::require(model.sigma > 0.0, "sigma must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, model.sigma);
  std::uniform_real_distribution<double> uniform(-2.0 * model.sigma, 2.0 * model.sigma);
  std::bernoulli_distribution coin(0.5);
  auto entries = detail::fill_by_orbit(p, n, [&](const std::vector<int>&) {
    switch (model.kind) {
      case NoiseKind::binary: return coin(rng) ? model.sigma : -model.sigma;
      case NoiseKind::uniform: return uniform(rng);
      case NoiseKind::gaussian: return normal(rng);
    }
    return 0.0;
  });
  return SymmetricTensor::from_symmetric_data(p, n, std::move(entries));
}

// ---- bound formulas ---------------------------------------------------------

struct BoundPair {
  double weight = 0.0;
  double vector = 0.0;
};

inline BoundPair first_step_bounds(double lambda, double eps) {
  const double r = eps / std::abs(lambda);
  return {eps, 10.0 * (r + r * r)};
}

inline BoundPair full_decomposition_bounds(double lambda, double eps) {
  return {2.0 * eps, 20.0 * eps / std::abs(lambda)};
}

/// Default admissible perturbation size c * lambda_min / n^{1/(p-1)}.
inline double admissibility_threshold(double lambda_min, int n, int p, double c = 0.125) {
  return c * lambda_min / std::pow(static_cast<double>(n), 1.0 / (p - 1));
}

// ---- reports -----------------------------------------------------------------

struct PairBoundCheck {
  int truth_index = -1;
  double weight_error = 0.0;
  double vector_error = 0.0;
  double weight_bound = 0.0;
  double vector_bound = 0.0;
  bool weight_violation = false;
  bool vector_violation = false;

  bool violated() const { return weight_violation || vector_violation; }
};

inline PairBoundCheck make_check(int truth_index, double weight_error, double vector_error, BoundPair bounds) {
  return {truth_index,         weight_error,  vector_error, bounds.weight, bounds.vector,
          weight_error > bounds.weight, vector_error > bounds.vector};
}

/// Diagnostics from bounding the first-step objective above and below.
struct FirstStepLemma {
  bool chosen_near_max = false;     ///< lambda_j >= lambda_max - 2 eps
  bool weight_within_eps = false;   ///< |lambda_hat - lambda_j| <= eps
  bool overlap_bound = false;       ///< |<v_hat, v_j>| >= 1 - 2 eps / lambda_j
  double overlap = 0.0;
};

struct FirstStepReport {
  double epsilon = 0.0;
  PairBoundCheck check;
  FirstStepLemma lemma;
};

struct BoundReport {
  double epsilon_hat = 0.0;
  bool admissible = false;
  double admissibility_threshold = 0.0;
  std::vector<PairBoundCheck> pairs;

  bool any_violation() const {
    return std::any_of(pairs.begin(), pairs.end(), [](const PairBoundCheck& c) { return c.violated(); });
  }
};

/// Compare a single rank-one result against the nearest ground-truth component.
inline FirstStepReport evaluate_first_step(const GroundTruth& truth, double epsilon, const RankOneResult& result,
                                           bool even_mode = false) {
  detail::require(epsilon >= 0.0, "epsilon must be non-negative");
  const auto pairs = truth.pairs();
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const double e = vector_error(pairs[j].vector, result.pair.vector, even_mode);
    if (e < best_err) {
      best_err = e;
      best = static_cast<int>(j);
    }
  }
  const SpectralPair& chosen = pairs[static_cast<std::size_t>(best)];
  const double weight_error = std::abs(result.pair.weight - chosen.weight);

  FirstStepReport report;
  report.epsilon = epsilon;
  report.check = make_check(best, weight_error, best_err, first_step_bounds(chosen.weight, epsilon));

  double lambda_max = -std::numeric_limits<double>::infinity();
  for (double w : truth.weights) lambda_max = std::max(lambda_max, std::abs(w));
  const double lj = std::abs(chosen.weight);
  report.lemma.overlap = std::abs(result.pair.vector.dot(chosen.vector));
  report.lemma.chosen_near_max = lj >= lambda_max - 2.0 * epsilon;
  report.lemma.weight_within_eps = weight_error <= epsilon;
  report.lemma.overlap_bound = report.lemma.overlap >= 1.0 - 2.0 * epsilon / lj;
  return report;
}

/// Per-pair full-decomposition bounds under the matching in `match`.
inline BoundReport evaluate_full(const GroundTruth& truth, double epsilon, const MatchReport& match, int order,
                                 double admissibility_c = 0.125) {
  detail::require(epsilon >= 0.0, "epsilon must be non-negative");
  BoundReport report;
  report.epsilon_hat = epsilon;
  report.admissibility_threshold = admissibility_threshold(truth.min_abs_weight(), truth.dim(), order, admissibility_c);
  report.admissible = epsilon <= report.admissibility_threshold;
  for (std::size_t j = 0; j < match.permutation.size(); ++j) {
    const int t = match.permutation[j];
    const double lambda = truth.weights[static_cast<std::size_t>(t)];
    report.pairs.push_back(make_check(t, match.weight_errors[j], match.vector_errors[j],
                                      full_decomposition_bounds(lambda, epsilon)));
  }
  return report;
}

// ---- symmetric matrix baseline ------------------------------------------------

struct MatrixBaselineReport {
  double epsilon = 0.0;        ///< |E|_2, exact
  double gap = 0.0;            ///< min_{i != 1} |lambda_1 - lambda_i|
  double lambda_true = 0.0;    ///< eigenvalue of largest magnitude of M
  double lambda_hat = 0.0;     ///< from power iteration on M + E
  double weight_error = 0.0;
  double overlap_sq = 0.0;     ///< <x_hat, v_1>^2
  double overlap_bound = 0.0;  ///< 1 - (2 eps / gap)^2
  bool gap_vacuous = false;    ///< gap == 0, overlap check skipped
  bool weight_violation = false;
  bool overlap_violation = false;
  bool power_converged = false;
};

/// Leading (largest |lambda|) eigenpair of a symmetric matrix by power iteration.
inline std::pair<double, Vector> matrix_power_iteration(const Matrix& m, Rng& rng, int max_iterations = 20000,
                                                        double tol = 1e-13, bool* converged = nullptr) {
  Vector x = random_unit_vector(rng, static_cast<int>(m.rows()));
  double lambda = x.dot(m * x);
  bool done = false;
  for (int it = 0; it < max_iterations; ++it) {
    Vector y = m * x;
    const double norm = y.norm();
    if (norm == 0.0) {
      lambda = 0.0;
      done = true;
      break;
    }
    y /= norm;
    const double step = std::min((y - x).norm(), (y + x).norm());
    x = y;
    lambda = x.dot(m * x);
    if (step <= tol) {
      done = true;
      break;
    }
  }
  if (converged) *converged = done;
  return {lambda, x};
}

/// Check the matrix perturbation bounds for M = basis diag(eigenvalues) basis^T
/// perturbed by symmetric E.
inline MatrixBaselineReport check_matrix_perturbation(const Vector& eigenvalues, const Matrix& basis,
                                                      const Matrix& perturbation, std::uint64_t seed) {
  const Eigen::Index n = eigenvalues.size();
  detail::require(n >= 2 && basis.rows() == n && basis.cols() == n, "basis must be n x n");
  detail::require(perturbation.rows() == n && perturbation.cols() == n, "perturbation must be n x n");

  Eigen::Index lead = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(eigenvalues[i]) > std::abs(eigenvalues[lead])) lead = i;

  MatrixBaselineReport r;
  r.lambda_true = eigenvalues[lead];
  r.gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != lead) r.gap = std::min(r.gap, std::abs(eigenvalues[lead] - eigenvalues[i]));

  const Matrix m = basis * eigenvalues.asDiagonal() * basis.transpose();
  const Matrix m_hat = m + perturbation;
  r.epsilon = symmetric_spectral_norm(perturbation);

  Rng rng(seed);
  auto [lambda_hat, x_hat] = matrix_power_iteration(m_hat, rng, 20000, 1e-13, &r.power_converged);
  r.lambda_hat = lambda_hat;
  r.weight_error = std::abs(lambda_hat - r.lambda_true);
  // Both sides carry rounding from the eigen solves, so compare with a slack
  // at the level of double precision.
  const double round = 1e-12 * (1.0 + std::abs(r.lambda_true));
  r.weight_violation = r.weight_error > r.epsilon + round;

  const double overlap = x_hat.dot(basis.col(lead));
  r.overlap_sq = overlap * overlap;
  r.gap_vacuous = !(r.gap > 0.0);
  if (!r.gap_vacuous) {
    const double ratio = 2.0 * r.epsilon / r.gap;
    r.overlap_bound = 1.0 - ratio * ratio;
    r.overlap_violation = r.overlap_sq < r.overlap_bound - 1e-12;
  }
  return r;
}

/// Symmetric matrix noise with i.i.d. entries on and above the diagonal.
inline Matrix generate_matrix_perturbation(const PerturbationModel& model, int n, std::uint64_t seed) {
  const SymmetricTensor e = generate_perturbation(model, n, 2, seed);
  return Eigen::Map<const Matrix>(e.entries().data(), n, n);
}

/// Random instance: eigenvalues (2, U[-1,1], ..., U[-1,1]) in a Haar-random
/// basis, plus a symmetric perturbation from `model`.
inline MatrixBaselineReport matrix_baseline(int n, const PerturbationModel& model, std::uint64_t seed) {
  detail::require(n >= 2, "matrix baseline needs n >= 2");
  Rng rng(derive_seed(seed, {0}));
  std::uniform_real_distribution<double> rest(-1.0, 1.0);
  Vector eigenvalues(n);
  eigenvalues[0] = 2.0;
  for (int i = 1; i < n; ++i) eigenvalues[i] = rest(rng);
  const Matrix basis = random_orthonormal(rng, n);
  const Matrix e = generate_matrix_perturbation(model, n, derive_seed(seed, {1}));
  return check_matrix_perturbation(eigenvalues, basis, e, derive_seed(seed, {2}));
}

}  // namespace sroa

#endif  // SROA_PERTURBATION_HPP_
