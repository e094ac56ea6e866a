#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <adfsmc/filter/api.hpp>
#include <adfsmc/filter/bootstrap.hpp>
#include <adfsmc/filter/pmmh.hpp>
#include <adfsmc/harness/config.hpp>
#include <adfsmc/harness/csv.hpp>
#include <adfsmc/harness/model_registry.hpp>
#include <adfsmc/oracles/grid_posterior.hpp>
#include <adfsmc/oracles/kalman.hpp>
#include <adfsmc/oracles/metrics.hpp>
#include <adfsmc/oracles/slam_exact.hpp>

namespace adfsmc::harness {

/// One point of the (N, M, seed) grid.
struct Cell {
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::string run_id;
};

struct CellOutput {
  std::vector<ResultRow> rows;
  Json summary;
};

/// A dataset plus whatever reference quantities can be computed for it.
struct Dataset {
  Trajectory trajectory;
  std::vector<double> truth;  // empty when unknown (loaded data)
  std::optional<oracles::ExactDiscretePosterior> exact;
};

inline void validate_for_run(const ExperimentConfig& cfg) {
  static const std::vector<std::string> algorithms = {"api", "pf", "liu-west", "pmmh"};
  if (std::find(algorithms.begin(), algorithms.end(), cfg.algorithm) == algorithms.end()) {
    throw ConfigError("unknown algorithm '" + cfg.algorithm + "'");
  }
  if (cfg.approx != "auto") parse_approx_family(cfg.approx);
  parse_scheme_kind(cfg.scheme);
  parse_resample_scheme(cfg.resample);
  parse_update_order(cfg.update_order);
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (cfg.time_budget_s && cfg.algorithm != "pmmh") {
    throw ConfigError("a time budget only applies to pmmh; sequential filters consume the whole stream");
  }
  for (auto n : cfg.particles) {
    if (n < 1) throw ConfigError("particles must be >= 1");
  }
  for (auto m : cfg.approx_samples) {
    if (m < 1) throw ConfigError("approx_samples must be >= 1");
  }
  make_model(cfg.model, cfg.overrides);
}

inline Dataset make_dataset(const ExperimentConfig& cfg, const AnyModel& model, std::uint64_t seed) {
  Dataset data;
  if (cfg.observations) {
    std::ifstream in(*cfg.observations);
    if (!in) throw ConfigError("cannot open observations file '" + *cfg.observations + "'");
    data.trajectory = read_trajectory_csv(in);
    if (cfg.theta) data.truth = *cfg.theta;
  } else {
    data.truth = cfg.theta ? *cfg.theta : default_true_theta(cfg.model, model);
    const ParamVector theta = make_param(model, data.truth);
    const std::size_t steps = cfg.steps ? *cfg.steps : default_steps(cfg.model, model);
    if (const auto* slam = std::get_if<models::SlamModel>(&model); slam && steps > slam->steps()) {
      throw ConfigError("SLAM instance has only " + std::to_string(slam->steps()) + " actions");
    }
    const std::uint64_t data_seed = cfg.data_seed ? *cfg.data_seed : seed;
    data.trajectory = std::visit([&](const auto& m) { return simulate(m, theta, steps, data_seed); }, model);
  }
  const std::size_t obs_dim = std::visit([](const auto& m) { return m.dims().obs; }, model);
  if (data.trajectory.observations.dim() != obs_dim) throw DimensionError("observations do not match the model");
  if (const auto* slam = std::get_if<models::SlamModel>(&model)) {
    try {
      data.exact = oracles::slam_exact_forward(*slam, data.trajectory.observations);
    } catch (const BudgetError&) {
      // Large instances: no exact reference, KL columns stay nan.
    }
  }
  return data;
}

namespace detail {

inline double squared_error(std::span<const double> estimate, const std::vector<double>& truth) {
  if (truth.empty() || estimate.size() != truth.size()) return NAN;
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return s / static_cast<double>(truth.size());
}

inline std::vector<std::vector<double>> unflatten(std::span<const double> flat, const std::vector<int>& cards) {
  std::vector<std::vector<double>> out;
  std::size_t off = 0;
  for (int c : cards) {
    out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(off),
                     flat.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(c)));
    off += static_cast<std::size_t>(c);
  }
  return out;
}

inline ApproxFamily resolve_family(const std::string& name, ParamKind kind) {
  if (name == "auto") return kind == ParamKind::discrete ? ApproxFamily::discrete : ApproxFamily::gaussian;
  return parse_approx_family(name);
}

}  // namespace detail

inline FilterConfig filter_config(const ExperimentConfig& cfg, const Cell& cell) {
  FilterConfig fc;
  fc.particles = cell.n;
  fc.approx.scheme = {parse_scheme_kind(cfg.scheme), cell.m};
  fc.approx.mixture_size = cfg.mixtures;
  fc.resample = parse_resample_scheme(cfg.resample);
  fc.order = parse_update_order(cfg.update_order);
  fc.seed = cell.seed;
  fc.shrinkage = cfg.shrinkage;
  fc.record_timing = cfg.record_timing;
  fc.permute_seed = cfg.permute_seed;
  return fc;
}

inline CellOutput rows_from_run(const ExperimentConfig& cfg, const Cell& cell, const Dataset& data,
                                const RunResult& run) {
  CellOutput out;
  const std::size_t p = run.param_dim;
  for (std::size_t t = 0; t < run.num_steps(); ++t) {
    const auto& s = run.steps[t];
    ResultRow r;
    r.run_id = cell.run_id;
    r.seed = cell.seed;
    r.algorithm = run.algorithm;
    r.model = cfg.model;
    r.n = cell.n;
    r.m = cell.m;
    r.l = cfg.mixtures;
    r.timestep = t;
    r.ess = s.ess;
    const auto sm = run.state_mean[t];
    r.state_mean.assign(sm.begin(), sm.end());
    if (run.kind == ParamKind::continuous && p > 0) {
      const auto mean = run.param_mean[t];
      const auto cov = run.param_cov[t];
      r.estimate.assign(mean.begin(), mean.end());
      for (std::size_t i = 0; i < p; ++i) r.estimate_var.push_back(cov[i * p + i]);
      r.mse = detail::squared_error(mean, data.truth);
    } else if (run.kind == ParamKind::discrete) {
      const auto marg = run.param_marginals[t];
      r.estimate.assign(marg.begin(), marg.end());
      if (data.exact && t < data.exact->map_marginals.size()) {
        r.kl = kl_factorized(detail::unflatten(marg, run.cardinalities), data.exact->map_marginals[t]);
      }
    }
    r.log_evidence = s.log_evidence_increment;
    r.wall_ms = s.wall_ms;
    r.allocations = s.allocations;
    r.updates = s.updates;
    r.distinct = s.distinct;
    out.rows.push_back(std::move(r));
  }

  Json& j = out.summary;
  j["run_id"] = cell.run_id;
  j["seed"] = cell.seed;
  j["algorithm"] = run.algorithm;
  j["model"] = cfg.model;
  j["N"] = cell.n;
  j["M"] = cell.m;
  j["L"] = cfg.mixtures;
  j["steps"] = run.num_steps();
  j["final_estimate"] = run.final_param_mean();
  if (!out.rows.empty()) {
    const auto& last = out.rows.back();
    j["final_mse"] = std::isnan(last.mse) ? Json(nullptr) : Json(last.mse);
    j["final_kl"] = std::isnan(last.kl) ? Json(nullptr) : Json(last.kl);
    j["kl_definition"] = "sum over map cells of KL(exact || estimate), map marginals only";
  }
  if (!data.truth.empty()) j["theta_true"] = data.truth;
  if (data.exact) j["exact_final_location"] = data.exact->location.back();
  j["log_evidence"] = run.log_evidence;
  j["total_wall_ms"] = run.total_wall_ms();
  j["steady_state_allocations"] = run.steady_state_allocations();
  j["index_copies"] = run.index_copies;
  j["fused_components"] = run.final_components.size();
  return out;
}

inline CellOutput rows_from_pmmh(const ExperimentConfig& cfg, const Cell& cell, const Dataset& data,
                                 const PmmhResult& res) {
  CellOutput out;
  for (std::size_t k = 0; k < res.iterations(); ++k) {
    ResultRow r;
    r.run_id = cell.run_id;
    r.seed = cell.seed;
    r.algorithm = "pmmh";
    r.model = cfg.model;
    r.n = cell.n;
    r.m = cell.m;
    r.l = cfg.mixtures;
    r.timestep = k;
    const auto theta = res.chain[k];
    r.estimate.assign(theta.begin(), theta.end());
    r.mse = detail::squared_error(theta, data.truth);
    r.log_evidence = res.log_likelihood[k];
    r.updates = res.accepted[k];
    out.rows.push_back(std::move(r));
  }
  Json& j = out.summary;
  j["run_id"] = cell.run_id;
  j["seed"] = cell.seed;
  j["algorithm"] = "pmmh";
  j["model"] = cfg.model;
  j["N"] = cell.n;
  j["iterations"] = res.iterations();
  j["acceptance_rate"] = res.acceptance_rate();
  j["nonfinite_proposals"] = res.nonfinite_proposals;
  j["final_estimate"] = res.posterior_mean;
  j["standard_error"] = res.standard_error;
  j["proposal_sd"] = cfg.pmmh_sd;
  if (!data.truth.empty() && data.truth.size() == res.posterior_mean.size()) {
    j["final_mse"] = detail::squared_error(res.posterior_mean, data.truth);
    j["theta_true"] = data.truth;
  }
  j["total_wall_ms"] = cfg.record_timing ? res.wall_ms : 0.0;
  return out;
}

/// Runs one algorithm on one dataset.
inline CellOutput run_cell(const ExperimentConfig& cfg, const Cell& cell) {
  const AnyModel model = make_model(cfg.model, cfg.overrides);
  const Dataset data = make_dataset(cfg, model, cell.seed);
  const Series& obs = data.trajectory.observations;
  return std::visit(
      [&](const auto& m) -> CellOutput {
        if (cfg.algorithm == "pmmh") {
          PmmhConfig pc;
          pc.particles = cell.n;
          pc.iterations = cfg.pmmh_iterations;
          pc.proposal_sd = cfg.pmmh_sd;
          pc.time_budget_s = cfg.time_budget_s;
          pc.seed = cell.seed;
          pc.resample = parse_resample_scheme(cfg.resample);
          return rows_from_pmmh(cfg, cell, data, pmmh_run(m, obs, pc));
        }
        const FilterConfig fc = filter_config(cfg, cell);
        RunResult run;
        if (cfg.algorithm == "api") {
          run = api_run(m, obs, fc, detail::resolve_family(cfg.approx, m.param_space().kind));
        } else if (cfg.algorithm == "pf") {
          run = bootstrap_pf_run(m, obs, fc);
        } else {
          run = liu_west_run(m, obs, fc);
        }
        return rows_from_run(cfg, cell, data, run);
      },
      model);
}

inline std::vector<Cell> expand_grid(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (auto n : cfg.particles) {
    for (auto m : cfg.approx_samples) {
      for (auto seed : cfg.seeds) {
        Cell c{n, m, seed, {}};
        c.run_id = cfg.algorithm + "-N" + std::to_string(n) + "-M" + std::to_string(m) + "-s" + std::to_string(seed);
        cells.push_back(std::move(c));
      }
    }
  }
  return cells;
}

/// Runs every cell on `cfg.jobs` worker threads; results come back in grid order.
inline std::vector<CellOutput> run_cells(const ExperimentConfig& cfg, const std::vector<Cell>& cells) {
  std::vector<CellOutput> outputs(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        outputs[k] = run_cell(cfg, cells[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::min(cfg.jobs, std::max<std::size_t>(cells.size(), 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

inline void write_outputs(const ExperimentConfig& cfg, const std::vector<CellOutput>& outputs) {
  std::ofstream csv(cfg.output, std::ios::binary);
  if (!csv) throw ConfigError("cannot write '" + cfg.output + "'");
  csv << result_csv_header() << '\n';
  Json runs = Json::array();
  for (const auto& o : outputs) {
    for (const auto& r : o.rows) write_result_row(csv, r);
    runs.push_back(o.summary);
  }
  Json summary;
  summary["schema"] = kResultSchemaVersion;
  summary["config"] = to_json(cfg);
  summary["runs"] = std::move(runs);
  std::ofstream js(cfg.summary, std::ios::binary);
  if (!js) throw ConfigError("cannot write '" + cfg.summary + "'");
  js << summary.dump(2) << '\n';
}

/// Reference computation for the configured model and dataset, as result rows.
inline CellOutput run_oracle(const ExperimentConfig& cfg) {
  const AnyModel model = make_model(cfg.model, cfg.overrides);
  const std::uint64_t seed = cfg.seeds.front();
  const Dataset data = make_dataset(cfg, model, seed);
  const Series& obs = data.trajectory.observations;
  CellOutput out;
  Json& j = out.summary;
  j["model"] = cfg.model;
  j["seed"] = seed;
  auto base_row = [&](const char* algorithm, std::size_t t) {
    ResultRow r;
    r.run_id = std::string(algorithm) + "-s" + std::to_string(seed);
    r.seed = seed;
    r.algorithm = algorithm;
    r.model = cfg.model;
    r.timestep = t;
    return r;
  };

  if (const auto* slam = std::get_if<models::SlamModel>(&model)) {
    if (!data.exact) {
      oracles::slam_exact_forward(*slam, obs);  // rethrows the budget refusal
    }
    const auto& ex = *data.exact;
    for (std::size_t t = 0; t < ex.map_marginals.size(); ++t) {
      ResultRow r = base_row("exact", t);
      for (const auto& table : ex.map_marginals[t]) r.estimate.insert(r.estimate.end(), table.begin(), table.end());
      r.state_mean.push_back(0.0);
      for (std::size_t l = 0; l < ex.location[t].size(); ++l) r.state_mean[0] += static_cast<double>(l) * ex.location[t][l];
      r.kl = 0.0;
      out.rows.push_back(std::move(r));
    }
    j["oracle"] = "exact forward recursion over (map, location)";
    j["final_map_marginals"] = ex.final_map();
    j["final_location"] = ex.location.back();
    j["log_evidence"] = ex.log_evidence;
    return out;
  }

  const ParamSpace& space = std::visit([](const auto& m) -> const ParamSpace& { return m.param_space(); }, model);
  if (const auto* lg = std::get_if<models::LinearGaussianModel>(&model)) {
    const double theta = lg->config().known_theta ? *lg->config().known_theta : data.truth.at(0);
    const auto kf = oracles::kalman_filter(*lg, theta, obs);
    for (std::size_t t = 0; t < kf.mean.size(); ++t) {
      ResultRow r = base_row("kalman", t);
      r.state_mean = {kf.mean[t]};
      r.estimate = {theta};
      r.estimate_var = {0.0};
      out.rows.push_back(std::move(r));
    }
    j["kalman_log_likelihood"] = kf.log_likelihood;
    if (space.dim == 1) {
      const auto grid = oracles::grid_posterior(
          *lg, obs, oracles::uniform_grid(space.lower[0], space.upper[0], cfg.oracle_grid_points));
      ResultRow r = base_row("grid", obs.size() - 1);
      r.estimate = {grid.mean()};
      r.estimate_var = {grid.variance()};
      r.mse = detail::squared_error(r.estimate, data.truth);
      out.rows.push_back(std::move(r));
      j["grid_mean"] = grid.mean();
      j["grid_variance"] = grid.variance();
      j["grid_mode"] = grid.mode();
      j["grid"] = grid.grid;
      j["grid_mass"] = grid.mass;
    }
    j["oracle"] = "kalman filter at the true parameter; grid posterior over theta";
    return out;
  }

  const auto& sin = std::get<models::SinModel>(model);
  oracles::PfGridOptions opts;
  opts.particles = cfg.oracle_particles;
  opts.replications = cfg.oracle_replications;
  opts.seed = seed;
  const auto grid = oracles::grid_posterior_pf(
      sin, obs, oracles::uniform_grid(space.lower[0], space.upper[0], cfg.oracle_grid_points), opts);
  ResultRow r = base_row("grid", obs.size() - 1);
  r.estimate = {grid.mean()};
  r.estimate_var = {grid.variance()};
  r.mse = detail::squared_error(r.estimate, data.truth);
  out.rows.push_back(std::move(r));
  j["grid"] = grid.grid;
  j["grid_mass"] = grid.mass;
  j["oracle"] = "grid posterior with averaged bootstrap-filter likelihoods (stochastic)";
  j["grid_mean"] = grid.mean();
  j["grid_variance"] = grid.variance();
  j["grid_mode"] = grid.mode();
  j["particles"] = opts.particles;
  j["replications"] = opts.replications;
  return out;
}

}  // namespace adfsmc::harness
