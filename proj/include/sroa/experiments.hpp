#ifndef SROA_EXPERIMENTS_HPP_
#define SROA_EXPERIMENTS_HPP_

// Monte Carlo harnesses: first-step errors across a sigma grid, and per-step
// error statistics of the full deflation loop. Every trial draws from a stream
// derived from (master seed, model kind, trial index), so records do not
// depend on evaluation order.

#include "sroa/perturbation.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace sroa {

struct TrialRecord {
  NoiseKind model = NoiseKind::gaussian;
  double sigma = 0.0;
  int trial = 0;
  double epsilon_hat = 0.0;
  int pair_index = 0;  ///< 1-based extraction step
  double lambda_err = 0.0;
  double vec_err = 0.0;
  double lambda_bound = 0.0;
  double vec_bound = 0.0;
  bool lambda_violation = false;
  bool vec_violation = false;
};

inline constexpr const char* kTrialCsvHeader =
    "model,sigma,trial,epsilon_hat,pair_index,lambda_err,vec_err,lambda_bound,vec_bound,lambda_violation,vec_violation";

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_trial_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << kTrialCsvHeader << '\n';
  for (const auto& r : records) {
    os << to_string(r.model) << ',' << format_double(r.sigma) << ',' << r.trial << ',' << format_double(r.epsilon_hat)
       << ',' << r.pair_index << ',' << format_double(r.lambda_err) << ',' << format_double(r.vec_err) << ','
       << format_double(r.lambda_bound) << ',' << format_double(r.vec_bound) << ',' << (r.lambda_violation ? 1 : 0)
       << ',' << (r.vec_violation ? 1 : 0) << '\n';
  }
}

inline std::size_t count_violations(const std::vector<TrialRecord>& records) {
  std::size_t c = 0;
  for (const auto& r : records) c += (r.lambda_violation || r.vec_violation) ? 1 : 0;
  return c;
}

/// Inclusive arithmetic grid start, start+step, ..., <= stop.
inline std::vector<double> sigma_grid(double start, double stop, double step) {
  detail::require(step > 0.0 && start > 0.0 && stop >= start, "sigma grid needs 0 < start <= stop and step > 0");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

/// Operator-norm estimate of a perturbation, warm-started from directions
/// where it is likely to be large. Any evaluated |E x^p| is a lower bound on
/// |E|, so extra starts only tighten the estimate.
inline double estimate_perturbation_norm(const SymmetricTensor& e, const SolverConfig& config,
                                         const std::vector<Vector>& hints = {}) {
  return operator_norm_estimate(e, config, hints);
}

struct SweepConfig {
  int n = 10;
  int p = 3;
  std::vector<NoiseKind> models{NoiseKind::binary, NoiseKind::uniform, NoiseKind::gaussian};
  std::vector<double> sigmas = sigma_grid(0.001, 0.2, 0.001);
  std::uint64_t seed = 0;
  SolverConfig solver;
};

/// One record per (model, sigma): identity SOD tensor with unit weights plus
/// one perturbation draw; first rank-one step checked against its bounds.
inline std::vector<TrialRecord> sweep_first_iteration(const SweepConfig& cfg) {
  detail::require(!cfg.sigmas.empty() && !cfg.models.empty(), "sweep grid must be non-empty");
  const SodInstance sod = generate_sod(cfg.n, cfg.p, std::vector<double>(cfg.n, 1.0), BasisMode::identity, 0);
  std::vector<TrialRecord> out;
  for (NoiseKind kind : cfg.models) {
    for (std::size_t t = 0; t < cfg.sigmas.size(); ++t) {
      const double sigma = cfg.sigmas[t];
      const auto kind_id = static_cast<std::uint64_t>(kind);
      const SymmetricTensor e =
          generate_perturbation({kind, sigma}, cfg.n, cfg.p, derive_seed(cfg.seed, {kind_id, t, 0}));
      const SymmetricTensor t_hat = add(sod.tensor, e);

      SolverConfig solver = cfg.solver;
      solver.seed = derive_seed(cfg.seed, {kind_id, t, 1});
      const RankOneResult r = best_rank_one(t_hat, solver);
      solver.seed = derive_seed(cfg.seed, {kind_id, t, 2});
      const double eps_hat = estimate_perturbation_norm(e, solver, {r.pair.vector});

      const FirstStepReport rep = evaluate_first_step(sod.truth, eps_hat, r);
      out.push_back({kind, sigma, static_cast<int>(t), eps_hat, 1, rep.check.weight_error, rep.check.vector_error,
                     rep.check.weight_bound, rep.check.vector_bound, rep.check.weight_violation,
                     rep.check.vector_violation});
    }
  }
  return out;
}

struct StabilityConfig {
  int n = 10;
  int p = 3;
  std::vector<NoiseKind> models{NoiseKind::binary, NoiseKind::uniform, NoiseKind::gaussian};
  double sigma = 0.01;
  int trials = 50;
  std::uint64_t seed = 0;
  SolverConfig solver;
};

struct StepSummary {
  NoiseKind model = NoiseKind::gaussian;
  int pair_index = 0;
  double lambda_err_mean = 0.0;
  double lambda_err_std = 0.0;
  double vec_err_mean = 0.0;
  double vec_err_std = 0.0;
};

struct ModelStability {
  NoiseKind model = NoiseKind::gaussian;
  double lambda_accumulation_ratio = 0.0;  ///< max_i mean / min_i mean
  double vec_accumulation_ratio = 0.0;
  std::size_t violations = 0;
  /// max over trials, steps and unextracted truth directions of
  /// |sum_{i' <= i} Delta_i' v_j^{p-1}| / (eps_hat^2 / lambda_min)
  double max_deflation_ratio = 0.0;
};

struct StabilityResult {
  std::vector<TrialRecord> records;
  std::vector<StepSummary> summary;
  std::vector<ModelStability> models;
};

inline constexpr const char* kSummaryCsvHeader =
    "model,pair_index,lambda_err_mean,lambda_err_std,vec_err_mean,vec_err_std";

inline void write_summary_csv(std::ostream& os, const std::vector<StepSummary>& rows) {
  os << kSummaryCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.model) << ',' << r.pair_index << ',' << format_double(r.lambda_err_mean) << ','
       << format_double(r.lambda_err_std) << ',' << format_double(r.vec_err_mean) << ','
       << format_double(r.vec_err_std) << '\n';
  }
}

/// Result of one full-decomposition trial on an identity SOD tensor.
struct StabilityTrial {
  double epsilon_hat = 0.0;
  std::vector<SpectralPair> recovered;
  MatchReport match;
  BoundReport bounds;
  double max_deflation_ratio = 0.0;
};

inline StabilityTrial run_stability_trial(const SodInstance& sod, const SymmetricTensor& e, int p,
                                          const SolverConfig& solver, std::uint64_t norm_seed) {
  const int n = sod.truth.dim();
  const SymmetricTensor t_hat = add(sod.tensor, e);
  const DecompositionResult dec = decompose(t_hat, n, solver);
  const auto truth = sod.truth.pairs();
  const bool even = p % 2 == 0;

  std::vector<Vector> hints;
  for (const auto& pr : dec.pairs) hints.push_back(pr.vector);
  SolverConfig norm_cfg = solver;
  norm_cfg.seed = norm_seed;

  StabilityTrial out;
  out.epsilon_hat = estimate_perturbation_norm(e, norm_cfg, hints);
  out.recovered = dec.pairs;
  out.match = match_to_ground_truth(dec, truth, even);
  out.bounds = evaluate_full(sod.truth, out.epsilon_hat, out.match, p);

  const auto profile = deflation_residual_profile(dec.pairs, truth, out.match, p);
  const double scale = out.epsilon_hat * out.epsilon_hat / sod.truth.min_abs_weight();
  for (const auto& row : profile)
    for (double v : row)
      if (v >= 0.0) out.max_deflation_ratio = std::max(out.max_deflation_ratio, scale > 0.0 ? v / scale : 0.0);
  return out;
}

/// Full decomposition per trial; per-step mean and (trials - 1)-divisor
/// standard deviation of the matched errors. `observer`, if set, sees every
/// trial in (model, trial) order.
using TrialObserver = std::function<void(NoiseKind, int, const SymmetricTensor& e, const StabilityTrial&)>;

inline StabilityResult deflation_stability(const StabilityConfig& cfg, const TrialObserver& observer = {}) {
  detail::require(cfg.trials >= 2, "need at least two trials");
  detail::require(cfg.sigma > 0.0, "sigma must be positive");
  const SodInstance sod = generate_sod(cfg.n, cfg.p, std::vector<double>(cfg.n, 1.0), BasisMode::identity, 0);

  StabilityResult result;
  for (NoiseKind kind : cfg.models) {
    const auto kind_id = static_cast<std::uint64_t>(kind);
    std::vector<double> sum_l(cfg.n, 0.0), sum_l2(cfg.n, 0.0), sum_v(cfg.n, 0.0), sum_v2(cfg.n, 0.0);
    ModelStability ms;
    ms.model = kind;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto t = static_cast<std::uint64_t>(trial);
      const SymmetricTensor e = generate_perturbation({kind, cfg.sigma}, cfg.n, cfg.p, derive_seed(cfg.seed, {kind_id, t, 0}));
      SolverConfig solver = cfg.solver;
      solver.seed = derive_seed(cfg.seed, {kind_id, t, 1});
      const StabilityTrial st = run_stability_trial(sod, e, cfg.p, solver, derive_seed(cfg.seed, {kind_id, t, 2}));
      if (observer) observer(kind, trial, e, st);
      ms.max_deflation_ratio = std::max(ms.max_deflation_ratio, st.max_deflation_ratio);
      for (std::size_t j = 0; j < st.bounds.pairs.size(); ++j) {
        const auto& c = st.bounds.pairs[j];
        result.records.push_back({kind, cfg.sigma, trial, st.epsilon_hat, static_cast<int>(j) + 1, c.weight_error,
                                  c.vector_error, c.weight_bound, c.vector_bound, c.weight_violation,
                                  c.vector_violation});
        ms.violations += c.violated() ? 1 : 0;
        sum_l[j] += c.weight_error;
        sum_l2[j] += c.weight_error * c.weight_error;
        sum_v[j] += c.vector_error;
        sum_v2[j] += c.vector_error * c.vector_error;
      }
    }
    const double m = cfg.trials;
    double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < cfg.n; ++j) {
      StepSummary s;
      s.model = kind;
      s.pair_index = j + 1;
      s.lambda_err_mean = sum_l[j] / m;
      s.vec_err_mean = sum_v[j] / m;
      s.lambda_err_std = std::sqrt(std::max(0.0, (sum_l2[j] - m * s.lambda_err_mean * s.lambda_err_mean) / (m - 1)));
      s.vec_err_std = std::sqrt(std::max(0.0, (sum_v2[j] - m * s.vec_err_mean * s.vec_err_mean) / (m - 1)));
      lmax = std::max(lmax, s.lambda_err_mean);
      lmin = std::min(lmin, s.lambda_err_mean);
      vmax = std::max(vmax, s.vec_err_mean);
      vmin = std::min(vmin, s.vec_err_mean);
      result.summary.push_back(s);
    }
    ms.lambda_accumulation_ratio = lmin > 0.0 ? lmax / lmin : (lmax > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    ms.vec_accumulation_ratio = vmin > 0.0 ? vmax / vmin : (vmax > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    result.models.push_back(ms);
  }
  return result;
}

}  // namespace sroa

#endif  // SROA_EXPERIMENTS_HPP_
