#ifndef SROA_RANK_ONE_HPP_
#define SROA_RANK_ONE_HPP_

// Rank-one approximation of a symmetric tensor:
//   odd p:  max_{|v|=1} T v^p,   lambda = T v^p
//   even p: max_{|v|=1} |T v^p|, lambda = T v^p (may be negative)
// solved by restarted higher-order power iteration. Global optimality is not
// guaranteed; every returned pair is a stationary point, and the best one over
// all starts is kept.

#include "sroa/random.hpp"
#include "sroa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sroa {

enum class SolveMode {
  automatic,     ///< pick by parity of the order
  maximize,      ///< max T v^p (odd-order convention)
  maximize_abs,  ///< max |T v^p| (even-order convention)
};

struct SolverConfig {
  int restarts = 30;
  int max_iterations = 500;
  double convergence_tol = 1e-10;
  std::uint64_t seed = 0;
  SolveMode mode = SolveMode::automatic;
  /// Tensors with Frobenius norm at or below this are treated as zero.
  double degenerate_tol = 1e-14;
  /// Include the 2n starts +-e_i ahead of the random restarts.
  bool basis_starts = true;

  void validate() const {
    detail::require(restarts >= 1, "restarts must be at least 1");
    detail::require(max_iterations >= 1, "max_iterations must be at least 1");
    detail::require(convergence_tol > 0.0, "convergence_tol must be positive");
    detail::require(degenerate_tol >= 0.0, "degenerate_tol must be non-negative");
  }
};

struct RankOneResult {
  SpectralPair pair;
  double objective = 0.0;  ///< T v^p at the returned vector
  int iterations_used = 0;
  bool converged = false;
  bool degenerate = false;
  double stationarity_residual = 0.0;  ///< |T v^{p-1} - lambda v|
};

/// |T v^{p-1} - lambda v|, the first-order optimality defect of a pair.
inline double check_stationarity(const SymmetricTensor& t, const SpectralPair& pair) {
  const Vector v = detail::checked_unit(pair.vector);
  detail::require(v.size() == t.dim(), "vector dimension does not match tensor");
  return (gradient_map(t, v) - pair.weight * v).norm();
}

/// Outcome of a single power-iteration run that maximizes T x^p from one start.
struct PowerRun {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline bool resolve_even(const SymmetricTensor& t, SolveMode mode) {
  switch (mode) {
    case SolveMode::maximize: return false;
    case SolveMode::maximize_abs: return true;
    case SolveMode::automatic: break;
  }
  return t.order() % 2 == 0;
}

}  // namespace detail

/// Maximize S x^p from `start`. Each step tries the plain update
/// x <- T x^{p-1} / |T x^{p-1}|; when that would lower the objective it falls
/// back to the shifted update x <- (T x^{p-1} + shift x) / |.|, which increases
/// the objective whenever shift >= (p-1) |S|. The objective sequence is
/// therefore non-decreasing up to rounding. `trace`, when given, receives the
/// objective after every iterate including the start.
inline PowerRun power_iterate(const SymmetricTensor& s, const Vector& start, const SolverConfig& config,
                              std::vector<double>* trace = nullptr) {
  const int p = s.order();
  const double shift = (p - 1) * frobenius_norm(s);
  const double tol = config.convergence_tol;

  PowerRun run;
  run.x = start.normalized();
  Vector grad = gradient_map(s, run.x);
  run.objective = grad.dot(run.x);
  if (trace) trace->push_back(run.objective);

  for (int it = 1; it <= config.max_iterations; ++it) {
    const double slack = 1e-14 * (1.0 + std::abs(run.objective));
    Vector next;
    double next_obj = -std::numeric_limits<double>::infinity();
    const double gnorm = grad.norm();
    if (gnorm > 0.0) {
      next = grad / gnorm;
      next_obj = evaluate(s, next);
    }
    if (!(next_obj >= run.objective - slack)) {
      next = (grad + shift * run.x).normalized();
      next_obj = evaluate(s, next);
    }
    const double step = std::min((next - run.x).norm(), (next + run.x).norm());
    run.x = std::move(next);
    grad = gradient_map(s, run.x);
    run.objective = grad.dot(run.x);
    run.iterations = it;
    if (trace) trace->push_back(run.objective);

    const double residual = (grad - run.objective * run.x).norm();
    if (step <= tol && residual <= 10.0 * tol * (1.0 + std::abs(run.objective))) {
      run.converged = true;
      break;
    }
  }
  return run;
}

/// Deterministic start list: +e_1, -e_1, ..., +e_n, -e_n (when enabled), then
/// `restarts` uniform draws on the sphere from the seeded stream. A prefix of
/// the random draws is shared between configs differing only in `restarts`.
inline std::vector<Vector> start_vectors(int dim, const SolverConfig& config) {
  std::vector<Vector> starts;
  if (config.basis_starts) {
    for (int i = 0; i < dim; ++i) {
      starts.push_back(Vector::Unit(dim, i));
      starts.push_back(-Vector::Unit(dim, i));
    }
  }
  Rng rng(config.seed);
  for (int r = 0; r < config.restarts; ++r) starts.push_back(random_unit_vector(rng, dim));
  return starts;
}

namespace detail {

/// Best run of power_iterate(s, .) over the given starts; ties keep the
/// lowest start index.
inline PowerRun best_run(const SymmetricTensor& s, const std::vector<Vector>& starts,
                         const SolverConfig& config) {
  PowerRun best;
  bool have = false;
  for (const Vector& x0 : starts) {
    PowerRun run = power_iterate(s, x0, config);
    if (!have || run.objective > best.objective) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

inline RankOneResult finish(const SymmetricTensor& t, Vector v, const PowerRun& run) {
  RankOneResult out;
  // Same arithmetic as PowerRun::objective, so comparisons across restarts
  // carry over to the reported value exactly.
  const Vector grad = gradient_map(t, v);
  const double lambda = grad.dot(v);
  out.stationarity_residual = (grad - lambda * v).norm();
  out.pair = {lambda, std::move(v)};
  out.objective = lambda;
  out.iterations_used = run.iterations;
  out.converged = run.converged;
  return out;
}

inline std::vector<Vector> with_extras(std::vector<Vector> starts, const std::vector<Vector>& extra) {
  starts.insert(starts.end(), extra.begin(), extra.end());
  return starts;
}

}  // namespace detail

/// Best rank-one approximation (lambda, v) of a symmetric tensor over restarts.
/// `extra_starts` are appended after the configured starts.
inline RankOneResult best_rank_one(const SymmetricTensor& t, const SolverConfig& config,
                                   const std::vector<Vector>& extra_starts = {}) {
  config.validate();
  const int n = t.dim();
  if (frobenius_norm(t) <= config.degenerate_tol) {
    RankOneResult out;
    out.pair = {0.0, Vector::Unit(n, 0)};
    out.converged = true;
    out.degenerate = true;
    return out;
  }

  const auto starts = detail::with_extras(start_vectors(n, config), extra_starts);
  if (!detail::resolve_even(t, config.mode)) {
    PowerRun run = detail::best_run(t, starts, config);
    Vector v = run.x;
    // For odd p, T(-v)^p = -T v^p; report the orientation with the larger value.
    if (t.order() % 2 == 1 && run.objective < 0.0) v = -v;
    return detail::finish(t, std::move(v), run);
  }

  const PowerRun plus = detail::best_run(t, starts, config);
  const PowerRun minus = detail::best_run(scale(t, -1.0), starts, config);
  const PowerRun& pick = (minus.objective > plus.objective) ? minus : plus;
  return detail::finish(t, pick.x, pick);
}

/// Lower bound on the operator norm max_{|x|=1} |T x^p|: the larger of the
/// best values found when maximizing T x^p and -T x^p.
inline double operator_norm_estimate(const SymmetricTensor& t, const SolverConfig& config,
                                     const std::vector<Vector>& extra_starts = {}) {
  config.validate();
  if (frobenius_norm(t) <= config.degenerate_tol) return 0.0;
  const auto starts = detail::with_extras(start_vectors(t.dim(), config), extra_starts);
  const double plus = detail::best_run(t, starts, config).objective;
  const double minus = detail::best_run(scale(t, -1.0), starts, config).objective;
  return std::max({plus, minus, 0.0});
}

/// Exhaustive search over a grid on the unit sphere (n = 2: equally spaced
/// angles; n = 3: spherical Fibonacci points), followed by a power-iteration
/// polish of the best grid point. Used as an oracle for small dimensions.
inline RankOneResult brute_force_rank_one(const SymmetricTensor& t, int grid_points,
                                          const SolverConfig& polish = {}) {
  if (t.dim() < 2 || t.dim() > 3) throw std::domain_error("brute-force search supports dimension 2 or 3 only");
  detail::require(grid_points >= 100, "grid must have at least 100 points");
  const bool even = detail::resolve_even(t, polish.mode);

  auto grid_point = [&](int k) {
    Vector x(t.dim());
    if (t.dim() == 2) {
      const double theta = 2.0 * std::numbers::pi * k / grid_points;
      x << std::cos(theta), std::sin(theta);
    } else {
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      const double z = 1.0 - (2.0 * k + 1.0) / grid_points;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      x << r * std::cos(golden * k), r * std::sin(golden * k), z;
    }
    return x;
  };

  Vector best_x;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_points; ++k) {
    const Vector x = grid_point(k);
    const double value = evaluate(t, x);
    const double score = even ? std::abs(value) : value;
    if (score > best_score) {
      best_score = score;
      best_x = x;
    }
  }

  const double sign = (even && evaluate(t, best_x) < 0.0) ? -1.0 : 1.0;
  const PowerRun run = power_iterate(scale(t, sign), best_x, polish);
  Vector v = run.x;
  if (!even && t.order() % 2 == 1 && evaluate(t, v) < 0.0) v = -v;
  // Keep the grid point if polishing somehow lost ground.
  const double polished = even ? std::abs(evaluate(t, v)) : evaluate(t, v);
  if (polished < best_score) v = best_x;
  return detail::finish(t, std::move(v), run);
}

}  // namespace sroa

#endif  // SROA_RANK_ONE_HPP_
