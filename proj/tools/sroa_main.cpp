// sroa: successive rank-one approximation of symmetric tensors, perturbation
// bound checks, and moment whitening.

#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using sroa::cli::RunConfig;

struct Options {
  RunConfig cfg;
  std::string config_file;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--n", o.cfg.n, "tensor dimension / number of components");
  app->add_option("--p", o.cfg.p, "tensor order");
  app->add_option("--seed", o.cfg.seed, "master random seed");
  app->add_option("--restarts", o.cfg.restarts, "random restarts per rank-one solve");
  app->add_option("--max-iterations", o.cfg.max_iterations, "power iterations per restart");
  app->add_option("--tol", o.cfg.tol, "convergence tolerance on successive iterates");
  app->add_option("--out", o.cfg.out, "output path (written atomically)");
  app->add_option("--config", o.config_file, "JSON config file; flags override its values");
}

void add_experiment(CLI::App* app, Options& o) {
  app->add_option("--model", o.cfg.model, "binary|uniform|gaussian|all")
      ->check(CLI::IsMember({"binary", "uniform", "gaussian", "all"}));
  app->add_option("--sigma", o.cfg.sigma, "perturbation scale");
  app->add_option("--trials", o.cfg.trials, "trials per model");
}

// Options given explicitly on the command line, in config-file key spelling.
std::set<std::string> given_keys(const CLI::App* app) {
  std::set<std::string> out;
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->count() == 0) continue;
    std::string name = opt->get_name(false, true);
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    for (char& c : name)
      if (c == '-') c = '_';
    out.insert(name);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Successive rank-one approximation for nearly orthogonally decomposable tensors"};
  app.require_subcommand(1);
  Options o;

  auto* dec = app.add_subcommand("decompose", "decompose a tensor file, print pairs as JSON");
  add_common(dec, o);
  dec->add_option("tensor", o.cfg.tensor, "tensor text file")->required();
  dec->add_option("--k", o.cfg.k, "number of rank-one components");

  auto* sweep = app.add_subcommand("sweep", "first-step errors over a sigma grid (CSV)");
  add_common(sweep, o);
  add_experiment(sweep, o);
  sweep->add_option("--sigma-grid", o.cfg.sigma_grid, "start:stop:step");
  sweep->add_flag("--paper-scale", o.cfg.paper_scale, "sigma step 0.0001");

  auto* stab = app.add_subcommand("stability", "per-step error statistics of the full decomposition (CSV)");
  add_common(stab, o);
  add_experiment(stab, o);
  stab->add_flag("--paper-scale", o.cfg.paper_scale, "500 trials per model");

  auto* whiten = app.add_subcommand("whiten", "whiten moments, decompose, recover model parameters (JSON)");
  add_common(whiten, o);
  whiten->add_option("--m2", o.cfg.m2, "second-moment matrix file");
  whiten->add_option("--mp", o.cfg.mp, "moment tensor file");
  whiten->add_option("--d", o.cfg.d, "vocabulary size for --synthetic");
  whiten->add_option("--sigma", o.cfg.sigma, "gaussian noise added to the synthetic moment tensor");
  whiten->add_flag("--synthetic", o.cfg.synthetic, "draw a random model and use its exact moments");

  auto* mat = app.add_subcommand("matrix-baseline", "symmetric-matrix perturbation bounds (CSV)");
  add_common(mat, o);
  add_experiment(mat, o);

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  if (!o.config_file.empty()) {
    try {
      std::ifstream in(o.config_file);
      if (!in) throw std::runtime_error("cannot open config file " + o.config_file);
      sroa::cli::apply_json_config(o.cfg, nlohmann::json::parse(in), given_keys(active));
    } catch (const std::exception& e) {
      std::cerr << "sroa: " << e.what() << '\n';
      return sroa::cli::kFailure;
    }
  }
  return sroa::cli::dispatch(active->get_name(), o.cfg, std::cout, std::cerr);
}
