#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/math.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/filter/bootstrap.hpp>
#include <adfsmc/models/linear_gaussian.hpp>
#include <adfsmc/oracles/kalman.hpp>

namespace adfsmc::oracles {

/// Posterior masses of a scalar parameter on a fixed grid.
struct GridPosterior {
  std::vector<double> grid;
  std::vector<double> mass;  // sums to one

  double mean() const {
    double s = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) s += grid[k] * mass[k];
    return s;
  }
  double variance() const {
    const double mu = mean();
    double s = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) s += (grid[k] - mu) * (grid[k] - mu) * mass[k];
    return s;
  }
  double mode() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) best = mass[k] > mass[best] ? k : best;
    return grid[best];
  }
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw ConfigError("grid needs >= 2 points and hi > lo");
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  return g;
}

/// Normalises log p(theta) + log p(y | theta) over the grid.
inline GridPosterior normalize_grid(std::vector<double> grid, std::span<const double> log_joint) {
  GridPosterior out;
  out.grid = std::move(grid);
  out.mass.resize(out.grid.size());
  const double total = exp_normalize(log_joint, out.mass);
  if (!(total > 0.0)) throw DegenerateWeightsError("grid posterior has no mass");
  for (double& m : out.mass) m /= total;
  return out;
}

/// Linear-Gaussian model: exact marginal likelihood from the Kalman filter.
inline GridPosterior grid_posterior(const models::LinearGaussianModel& model, const Series& observations,
                                    std::vector<double> grid) {
  std::vector<double> log_joint(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double th = grid[k];
    log_joint[k] = model.param_prior_logpdf(std::span<const double>(&th, 1)) +
                   kalman_filter(model, th, observations).log_likelihood;
  }
  return normalize_grid(std::move(grid), log_joint);
}

struct PfGridOptions {
  std::size_t particles = 10000;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
};

/// Any scalar-parameter model: the likelihood at each grid point is the
/// average of `replications` independent bootstrap-filter estimates.
template <DynamicModel Model>
GridPosterior grid_posterior_pf(const Model& model, const Series& observations, std::vector<double> grid,
                                const PfGridOptions& opts = {}) {
  if (model.param_space().dim != 1) throw DimensionError("grid posterior needs a scalar parameter");
  BootstrapLikelihood<Model> estimate(model, observations, opts.particles);
  std::vector<double> log_joint(grid.size());
  std::vector<double> reps(opts.replications);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double th = grid[k];
    const std::span<const double> theta(&th, 1);
    RngStream rng = RngStream(opts.seed, StreamId::kInnerFilter).fork(k);
    for (auto& r : reps) r = estimate(theta, rng);
    log_joint[k] = model.param_prior_logpdf(theta) + log_sum_exp(reps) - std::log(static_cast<double>(reps.size()));
  }
  return normalize_grid(std::move(grid), log_joint);
}

}  // namespace adfsmc::oracles
