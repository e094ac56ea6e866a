// adfsmc: simulate | run | sweep | oracle
//
// Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy,
// 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <adfsmc/core/alloc_hook_impl.hpp>
#include <adfsmc/harness/runner.hpp>

namespace {

using namespace adfsmc;
using namespace adfsmc::harness;

constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct Flags {
  std::string config;
  std::optional<std::string> model, algorithm, approx, scheme, out, summary, observations, resample, order;
  std::vector<std::size_t> particles, approx_samples;
  std::optional<std::size_t> mixtures, steps, jobs, iterations, grid_points;
  std::vector<std::uint64_t> seeds;
  std::vector<double> theta;
  std::optional<std::uint64_t> data_seed;
  std::optional<double> time_budget, pmmh_sd, shrinkage;
  bool no_timing = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("-c,--config", f.config, "JSON experiment config; flags override its values");
  app->add_option("--model", f.model, "sin | sin-bimodal | slam-small | slam-large | lg");
  app->add_option("--seed", f.seeds, "RNG seed(s)");
  app->add_option("--steps", f.steps, "number of transitions T (observations y_0..y_T)");
  app->add_option("--theta", f.theta, "true parameter used to simulate data");
  app->add_option("--data-seed", f.data_seed, "seed of the simulated dataset (default: the run seed)");
  app->add_option("--observations", f.observations, "trajectory CSV to filter instead of simulating");
  app->add_option("--out", f.out, "result CSV path");
  app->add_option("--summary", f.summary, "summary JSON path");
}

void add_algorithm(CLI::App* app, Flags& f) {
  app->add_option("--algorithm", f.algorithm, "api | pf | liu-west | pmmh");
  app->add_option("-N,--particles", f.particles, "number of particles N");
  app->add_option("-M,--approx-samples", f.approx_samples, "moment-matching samples M");
  app->add_option("-L,--mixtures", f.mixtures, "mixture components L");
  app->add_option("--approx", f.approx, "auto | gaussian | mixture | discrete");
  app->add_option("--scheme", f.scheme, "gauss_hermite | unscented | monte_carlo");
  app->add_option("--resample", f.resample, "multinomial | systematic");
  app->add_option("--update-order", f.order, "resample_first | update_first");
  app->add_option("--time-budget", f.time_budget, "PMMH wall-clock budget in seconds");
  app->add_option("--iterations", f.iterations, "PMMH iterations");
  app->add_option("--pmmh-sd", f.pmmh_sd, "PMMH proposal standard deviation");
  app->add_option("--shrinkage", f.shrinkage, "Liu-West shrinkage a");
  app->add_option("--jobs", f.jobs, "worker threads for sweep cells");
  app->add_flag("--no-timing", f.no_timing, "write 0 into wall-clock columns (byte-reproducible output)");
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.model) c.model = *f.model;
  if (f.algorithm) c.algorithm = *f.algorithm;
  if (f.approx) c.approx = *f.approx;
  if (f.scheme) c.scheme = *f.scheme;
  if (f.resample) c.resample = *f.resample;
  if (f.order) c.update_order = *f.order;
  if (f.out) c.output = *f.out;
  if (f.summary) c.summary = *f.summary;
  if (f.observations) c.observations = *f.observations;
  if (!f.particles.empty()) c.particles = f.particles;
  if (!f.approx_samples.empty()) c.approx_samples = f.approx_samples;
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (!f.theta.empty()) c.theta = f.theta;
  if (f.mixtures) c.mixtures = *f.mixtures;
  if (f.steps) c.steps = *f.steps;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.iterations) c.pmmh_iterations = *f.iterations;
  if (f.data_seed) c.data_seed = *f.data_seed;
  if (f.time_budget) c.time_budget_s = *f.time_budget;
  if (f.pmmh_sd) c.pmmh_sd = *f.pmmh_sd;
  if (f.shrinkage) c.shrinkage = *f.shrinkage;
  if (f.grid_points) c.oracle_grid_points = *f.grid_points;
  if (f.no_timing) c.record_timing = false;
  return c;
}

int cmd_simulate(const Flags& f) {
  ExperimentConfig c = build_config(f);
  if (!f.out) c.output = "trajectory.csv";
  const AnyModel model = make_model(c.model, c.overrides);
  const auto truth = c.theta ? *c.theta : default_true_theta(c.model, model);
  const ParamVector theta = make_param(model, truth);
  const std::size_t steps = c.steps ? *c.steps : default_steps(c.model, model);
  const std::uint64_t seed = c.data_seed ? *c.data_seed : c.seeds.front();
  if (const auto* slam = std::get_if<models::SlamModel>(&model); slam && steps > slam->steps()) {
    throw ConfigError("SLAM instance has only " + std::to_string(slam->steps()) + " actions");
  }
  const Trajectory traj = std::visit([&](const auto& m) { return simulate(m, theta, steps, seed); }, model);
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + c.output + "'");
  write_trajectory_csv(out, traj);
  return 0;
}

int cmd_run(const Flags& f, bool sweep) {
  const ExperimentConfig c = build_config(f);
  validate_for_run(c);
  if (!sweep && (c.particles.size() != 1 || c.approx_samples.size() != 1)) {
    throw ConfigError("run takes a single N and M; use sweep for lists");
  }
  const auto cells = expand_grid(c);
  write_outputs(c, run_cells(c, cells));
  std::cerr << "wrote " << cells.size() << " run(s) to " << c.output << " and " << c.summary << '\n';
  return 0;
}

int cmd_oracle(const Flags& f) {
  ExperimentConfig c = build_config(f);
  if (!f.out && f.config.empty()) c.output = "oracle.csv";
  if (!f.summary && f.config.empty()) c.summary = "oracle.json";
  make_model(c.model, c.overrides);
  std::vector<CellOutput> outputs{run_oracle(c)};
  write_outputs(c, outputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assumed parameter inference and baseline particle methods"};
  app.require_subcommand(1);
  Flags sim_flags, run_flags, sweep_flags, oracle_flags;
  auto* sim = app.add_subcommand("simulate", "simulate a trajectory (t, x..., y...) from a model");
  add_common(sim, sim_flags);
  auto* run = app.add_subcommand("run", "run one algorithm on one dataset per seed");
  add_common(run, run_flags);
  add_algorithm(run, run_flags);
  auto* sweep = app.add_subcommand("sweep", "Cartesian sweep over N, M and seeds");
  add_common(sweep, sweep_flags);
  add_algorithm(sweep, sweep_flags);
  auto* oracle = app.add_subcommand("oracle", "exact SLAM posterior, Kalman filter or grid posterior");
  add_common(oracle, oracle_flags);
  oracle->add_option("--grid-points", oracle_flags.grid_points, "grid resolution for the parameter posterior");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags);
    if (*run) return cmd_run(run_flags, false);
    if (*sweep) return cmd_run(sweep_flags, true);
    if (*oracle) return cmd_oracle(oracle_flags);
  } catch (const DegenerateWeightsError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
