#ifndef SROA_TOOLS_COMMANDS_HPP_
#define SROA_TOOLS_COMMANDS_HPP_

// Subcommand implementations for the sroa command-line tool. Each command
// takes a fully resolved RunConfig plus output/log streams and returns the
// process exit code, so tests can drive them without spawning processes.

#include "sroa/experiments.hpp"
#include "sroa/io.hpp"
#include "sroa/perturbation.hpp"
#include "sroa/sroa.hpp"
#include "sroa/whitening.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sroa::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kNotConverged = 2,
  kRankDeficient = 3,
};

struct RunConfig {
  std::optional<int> n;
  std::optional<int> p;
  std::optional<int> k;
  std::optional<int> d;
  std::string model = "all";
  std::optional<double> sigma;
  std::optional<std::string> sigma_grid;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::optional<int> max_iterations;
  std::optional<double> tol;
  bool paper_scale = false;
  std::optional<std::string> out;
  // inputs
  std::optional<std::string> tensor;
  std::optional<std::string> m2;
  std::optional<std::string> mp;
  bool synthetic = false;
};

/// Fill every field of `cfg` whose key is not in `given` from the JSON object.
/// Keys use the flag spellings with underscores: sigma_grid, paper_scale, ...
inline void apply_json_config(RunConfig& cfg, const nlohmann::json& j, const std::set<std::string>& given) {
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  static const std::set<std::string> known{"n",        "p",     "k",        "d",    "model",      "sigma",
                                           "sigma_grid", "trials", "seed",   "restarts", "max_iterations",
                                           "tol",      "paper_scale", "out", "tensor", "m2", "mp", "synthetic"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);
  }
  auto take = [&](const char* key, auto& field) {
    if (given.count(key) || !j.contains(key)) return;
    using T = std::decay_t<decltype(field)>;
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
      field = j.at(key).get<typename T::value_type>();
    } else {
      field = j.at(key).get<T>();
    }
  };
  take("n", cfg.n);
  take("p", cfg.p);
  take("k", cfg.k);
  take("d", cfg.d);
  take("model", cfg.model);
  take("sigma", cfg.sigma);
  take("sigma_grid", cfg.sigma_grid);
  take("trials", cfg.trials);
  take("seed", cfg.seed);
  take("restarts", cfg.restarts);
  take("max_iterations", cfg.max_iterations);
  take("tol", cfg.tol);
  take("paper_scale", cfg.paper_scale);
  take("out", cfg.out);
  take("tensor", cfg.tensor);
  take("m2", cfg.m2);
  take("mp", cfg.mp);
  take("synthetic", cfg.synthetic);
}

inline SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  if (cfg.restarts) s.restarts = *cfg.restarts;
  if (cfg.max_iterations) s.max_iterations = *cfg.max_iterations;
  if (cfg.tol) s.convergence_tol = *cfg.tol;
  if (cfg.seed) s.seed = *cfg.seed;
  return s;
}

inline std::vector<NoiseKind> models_of(const std::string& name) {
  if (name == "all") return {NoiseKind::binary, NoiseKind::uniform, NoiseKind::gaussian};
  return {parse_noise_kind(name)};
}

/// "start:stop:step"
inline std::vector<double> parse_sigma_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() != 3) throw std::invalid_argument("sigma grid must be start:stop:step");
  return sigma_grid(parts[0], parts[1], parts[2]);
}

inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out) {
    write_file_atomic(*cfg.out, text);
  } else {
    out << text;
  }
}

inline nlohmann::json decomposition_json(const DecompositionResult& r) {
  nlohmann::json j;
  j["order"] = r.order;
  j["dim"] = r.dim;
  j["pairs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    std::vector<double> v(r.pairs[i].vector.data(), r.pairs[i].vector.data() + r.pairs[i].vector.size());
    j["pairs"].push_back({{"lambda", r.pairs[i].weight},
                          {"vector", v},
                          {"converged", r.flags[i].converged},
                          {"degenerate", r.flags[i].degenerate},
                          {"negative_weight", r.flags[i].negative_weight}});
  }
  j["residual_frobenius"] = r.residual_frobenius;
  j["stationarity"] = r.stationarity;
  return j;
}

inline DecompositionResult decomposition_from_json(const nlohmann::json& j) {
  DecompositionResult r;
  r.order = j.at("order").get<int>();
  r.dim = j.at("dim").get<int>();
  for (const auto& pr : j.at("pairs")) {
    const auto v = pr.at("vector").get<std::vector<double>>();
    r.pairs.push_back({pr.at("lambda").get<double>(), Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()))});
  }
  return r;
}

inline int cmd_decompose(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  if (!cfg.tensor) {
    log << "decompose: a tensor file is required\n";
    return kFailure;
  }
  TensorFile file;
  try {
    file = read_file(*cfg.tensor, [](std::istream& in) { return read_tensor(in); });
  } catch (const ParseError& e) {
    log << *cfg.tensor << ": " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    log << "decompose: " << e.what() << '\n';
    return kFailure;
  }
  const int k = cfg.k.value_or(file.tensor.dim());
  if (k < 1 || k > file.tensor.dim()) {
    log << "decompose: --k must lie in [1, " << file.tensor.dim() << "]\n";
    return kFailure;
  }
  const DecompositionResult r = decompose(file.tensor, k, solver_config(cfg));
  auto j = decomposition_json(r);
  j["max_symmetrization_correction"] = file.max_symmetrization_correction;
  emit(cfg, out, j.dump(2) + "\n");
  if (!r.all_converged()) {
    log << "decompose: at least one rank-one step did not converge\n";
    return kNotConverged;
  }
  return kOk;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  if (!cfg.seed) {
    log << "sweep: --seed is required\n";
    return kFailure;
  }
  SweepConfig sc;
  sc.n = cfg.n.value_or(10);
  sc.p = cfg.p.value_or(3);
  sc.models = models_of(cfg.model);
  sc.seed = *cfg.seed;
  sc.solver = solver_config(cfg);
  if (cfg.sigma_grid) {
    sc.sigmas = parse_sigma_grid(*cfg.sigma_grid);
  } else if (cfg.paper_scale) {
    sc.sigmas = sigma_grid(0.0001, 0.2, 0.0001);
  }
  const auto records = sweep_first_iteration(sc);
  std::ostringstream csv;
  write_trial_csv(csv, records);
  emit(cfg, out, csv.str());
  for (NoiseKind kind : sc.models) {
    std::size_t rows = 0, bad = 0;
    for (const auto& r : records) {
      if (r.model != kind) continue;
      ++rows;
      bad += (r.lambda_violation || r.vec_violation) ? 1 : 0;
    }
    log << "sweep " << to_string(kind) << ": " << rows << " instances, " << bad << " violations\n";
  }
  return kOk;
}

inline std::filesystem::path summary_path(const std::filesystem::path& raw) {
  std::filesystem::path out = raw;
  out.replace_filename(raw.stem().string() + "_summary" + raw.extension().string());
  return out;
}

inline int cmd_stability(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  if (!cfg.seed) {
    log << "stability: --seed is required\n";
    return kFailure;
  }
  StabilityConfig sc;
  sc.n = cfg.n.value_or(10);
  sc.p = cfg.p.value_or(3);
  sc.models = models_of(cfg.model);
  sc.sigma = cfg.sigma.value_or(0.01);
  sc.trials = cfg.trials.value_or(cfg.paper_scale ? 500 : 50);
  sc.seed = *cfg.seed;
  sc.solver = solver_config(cfg);
  if (sc.trials < 2) {
    log << "stability: --trials must be at least 2\n";
    return kFailure;
  }
  const auto res = deflation_stability(sc);
  std::ostringstream raw, summary;
  write_trial_csv(raw, res.records);
  write_summary_csv(summary, res.summary);
  if (cfg.out) {
    write_file_atomic(*cfg.out, raw.str());
    write_file_atomic(summary_path(*cfg.out), summary.str());
  } else {
    out << summary.str();
  }
  for (const auto& m : res.models) {
    log << "stability " << to_string(m.model) << ": accumulation ratio vector=" << format_double(m.vec_accumulation_ratio)
        << " lambda=" << format_double(m.lambda_accumulation_ratio) << ", violations " << m.violations << '\n';
  }
  return kOk;
}

inline int cmd_matrix_baseline(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  if (!cfg.seed) {
    log << "matrix-baseline: --seed is required\n";
    return kFailure;
  }
  const int n = cfg.n.value_or(10);
  const int trials = cfg.trials.value_or(100);
  const PerturbationModel model{cfg.model == "all" ? NoiseKind::gaussian : parse_noise_kind(cfg.model),
                                cfg.sigma.value_or(0.01)};
  std::ostringstream csv;
  csv << "trial,epsilon,gap,lambda_err,overlap_sq,overlap_bound,gap_vacuous,lambda_violation,overlap_violation\n";
  std::size_t bad = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = matrix_baseline(n, model, derive_seed(*cfg.seed, {static_cast<std::uint64_t>(t)}));
    bad += (r.weight_violation || r.overlap_violation) ? 1 : 0;
    csv << t << ',' << format_double(r.epsilon) << ',' << format_double(r.gap) << ',' << format_double(r.weight_error)
        << ',' << format_double(r.overlap_sq) << ',' << format_double(r.overlap_bound) << ',' << (r.gap_vacuous ? 1 : 0)
        << ',' << (r.weight_violation ? 1 : 0) << ',' << (r.overlap_violation ? 1 : 0) << '\n';
  }
  emit(cfg, out, csv.str());
  log << "matrix-baseline: " << trials << " instances, " << bad << " violations\n";
  return kOk;
}

inline nlohmann::json params_json(const RecoveredParams& r) {
  nlohmann::json j;
  j["w"] = std::vector<double>(r.weights.data(), r.weights.data() + r.weights.size());
  j["mu"] = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.topic_vectors.cols(); ++i) {
    const Vector c = r.topic_vectors.col(i);
    j["mu"].push_back(std::vector<double>(c.data(), c.data() + c.size()));
  }
  j["clip_mass"] = r.clip_mass;
  return j;
}

inline int cmd_whiten(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    MomentPair moments;
    std::optional<TopicModelParams> truth;
    int n = 0;
    const int p = cfg.p.value_or(3);
    std::optional<SymmetricTensor> noise;
    if (cfg.synthetic) {
      if (!cfg.seed) {
        log << "whiten: --seed is required with --synthetic\n";
        return kFailure;
      }
      n = cfg.n.value_or(3);
      const int d = cfg.d.value_or(5);
      if (d < n) {
        log << "whiten: " << RankDeficientError(d, n).what() << '\n';
        return kRankDeficient;
      }
      truth = random_topic_model(n, d, derive_seed(*cfg.seed, {0}));
      moments = synthesize_moments(*truth, p);
      if (cfg.sigma) {
        noise = generate_perturbation({NoiseKind::gaussian, *cfg.sigma}, d, p, derive_seed(*cfg.seed, {1}));
        moments.mp = add(moments.mp, *noise);
      }
    } else {
      if (!cfg.m2 || !cfg.mp || !cfg.n) {
        log << "whiten: need --m2, --mp and --n, or --synthetic\n";
        return kFailure;
      }
      n = *cfg.n;
      std::string current = *cfg.m2;
      try {
        moments.m2 = read_file(current, [](std::istream& in) { return read_matrix(in); });
        current = *cfg.mp;
        moments.mp = read_file(current, [](std::istream& in) { return read_tensor(in); }).tensor;
      } catch (const ParseError& e) {
        log << current << ": " << e.what() << '\n';
        return kFailure;
      }
    }

    const auto wd = whiten_and_decompose(moments, n, solver_config(cfg));
    const auto rec = recover_parameters(wd.result, wd.whitener);
    emit(cfg, out, params_json(rec).dump(2) + "\n");

    if (truth) {
      const auto err = compare_parameters(rec, *truth);
      log << "whiten: max |w error| " << format_double(err.max_weight_error) << ", max |mu error| "
          << format_double(err.max_topic_error) << ", clip mass " << format_double(rec.clip_mass) << '\n';
      if (noise) {
        const auto truth_pairs = whitened_truth(*truth, wd.whitener, p);
        const SymmetricTensor noise_w = multilinear_transform(*noise, wd.whitener);
        std::vector<Vector> hints;
        for (const auto& pr : wd.result.pairs) hints.push_back(pr.vector);
        const double eps = operator_norm_estimate(noise_w, solver_config(cfg), hints);
        GroundTruth gt;
        for (const auto& tp : truth_pairs) gt.weights.push_back(tp.weight);
        gt.basis.resize(n, n);
        for (int i = 0; i < n; ++i) gt.basis.col(i) = truth_pairs[static_cast<std::size_t>(i)].vector;
        const auto match = match_to_ground_truth(wd.result, truth_pairs, p % 2 == 0);
        const auto report = evaluate_full(gt, eps, match, p);
        for (std::size_t j = 0; j < report.pairs.size(); ++j) {
          const auto& c = report.pairs[j];
          log << "whiten: pair " << j + 1 << " lambda_err " << format_double(c.weight_error) << " (bound "
              << format_double(c.weight_bound) << "), vec_err " << format_double(c.vector_error) << " (bound "
              << format_double(c.vector_bound) << ")" << (c.violated() ? " VIOLATION" : "") << '\n';
        }
      }
    }
    if (!wd.result.all_converged()) return kNotConverged;
    return kOk;
  } catch (const RankDeficientError& e) {
    log << "whiten: " << e.what() << '\n';
    return kRankDeficient;
  }
}

/// Run the named subcommand; any escaping exception becomes exit code 1.
inline int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    if (command == "decompose") return cmd_decompose(cfg, out, log);
    if (command == "sweep") return cmd_sweep(cfg, out, log);
    if (command == "stability") return cmd_stability(cfg, out, log);
    if (command == "whiten") return cmd_whiten(cfg, out, log);
    if (command == "matrix-baseline") return cmd_matrix_baseline(cfg, out, log);
    log << "unknown command: " << command << '\n';
  } catch (const std::exception& e) {
    log << command << ": " << e.what() << '\n';
  }
  return kFailure;
}

}  // namespace sroa::cli

#endif  // SROA_TOOLS_COMMANDS_HPP_
