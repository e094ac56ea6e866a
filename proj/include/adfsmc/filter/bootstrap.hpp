#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include <adfsmc/approx/gaussian.hpp>
#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/filter/config.hpp>
#include <adfsmc/filter/diagnostics.hpp>
#include <adfsmc/filter/particle_store.hpp>
#include <adfsmc/filter/resample.hpp>
#include <adfsmc/filter/run_result.hpp>
#include <adfsmc/filter/step_meter.hpp>
#include <adfsmc/filter/summary.hpp>

namespace adfsmc {

namespace detail {

/// Bootstrap particle filter with static parameter particles theta^i drawn
/// once from the prior. shrinkage < 1 turns on Liu-West kernel moves:
/// theta <- a theta + (1 - a) mean + N(0, (1 - a^2) V) before each propagation
/// at t >= 1, with mean and V the moments of the (equally weighted, just
/// resampled) parameter cloud.
template <DynamicModel Model>
RunResult particle_filter(const Model& model, const Series& observations, const FilterConfig& cfg,
                          double shrinkage, const char* name) {
  cfg.validate();
  const Dims dims = model.dims();
  const ParamSpace& space = model.param_space();
  detail::check_observations(observations, dims);

  const std::size_t n = cfg.particles;
  const std::size_t p = space.dim;
  const std::size_t order = static_cast<std::size_t>(model.markov_order());
  const std::size_t steps = observations.size();
  const bool kernel_moves = shrinkage < 1.0 && p > 0;

  RngStream init_rng(cfg.seed, StreamId::kInit);
  RngStream prop_rng(cfg.seed, StreamId::kPropagate);
  RngStream resample_rng(cfg.seed, StreamId::kResample);
  RngStream perturb_rng(cfg.seed, StreamId::kPerturb);
  RngStream permute_rng(cfg.permute_seed, StreamId::kPerturb);

  RowSlab thetas(n, p);
  for (std::size_t i = 0; i < n; ++i) model.sample_param_prior(init_rng, thetas.live_slot(i));

  StateStore states(n, order, dims.state);
  std::vector<double> log_w(n);
  std::vector<double> scratch(n);
  std::vector<std::uint32_t> ancestors(n);
  std::vector<std::uint32_t> perm(n);
  ResampleWorkspace resample_ws(n);
  ParamSummary summary = ParamSummary::for_space(space);
  detail::identity(perm);

  const auto pp = static_cast<Eigen::Index>(p);
  Eigen::VectorXd cloud_mean(pp);
  Eigen::MatrixXd cloud_cov(pp, pp);
  Eigen::MatrixXd kernel_chol(pp, pp);
  std::vector<double> noise(p);

  RunResult result;
  result.algorithm = name;
  result.kind = space.kind;
  result.param_dim = p;
  result.cardinalities = space.cardinalities;
  result.steps.resize(steps);
  result.state_mean = Series(dims.state);
  result.state_mean.resize(steps);
  if (space.kind == ParamKind::continuous) {
    result.param_mean = Series(p == 0 ? 1 : p);
    result.param_cov = Series(p == 0 ? 1 : p * p);
    if (p > 0) {
      result.param_mean.resize(steps);
      result.param_cov.resize(steps);
    }
  } else {
    result.param_marginals = Series(summary.table_size());
    result.param_marginals.resize(steps);
  }

  const double a = shrinkage;
  const double kernel_scale = std::sqrt(std::max(0.0, 1.0 - a * a));
  StepMeter meter(cfg.record_timing);

  for (std::size_t t = 0; t < steps; ++t) {
    meter.start();
    StepRecord& rec = result.steps[t];
    rec.t = t;
    const auto y = observations[t];

    if (kernel_moves && t > 0) {
      const auto mean_row = result.param_mean[t - 1];
      const auto cov_row = result.param_cov[t - 1];
      for (std::size_t i = 0; i < p; ++i) {
        cloud_mean(static_cast<Eigen::Index>(i)) = mean_row[i];
        for (std::size_t j = 0; j < p; ++j) {
          cloud_cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov_row[i * p + j];
        }
      }
      cloud_cov *= kernel_scale * kernel_scale;
      // A collapsed cloud has no spread to perturb with; only shrink it.
      const bool has_noise = detail::factorize_jittered(cloud_cov, kernel_chol) >= 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto src = thetas.current(i);
        const auto dst = thetas.staging(i);
        for (std::size_t j = 0; j < p; ++j) dst[j] = a * src[j] + (1.0 - a) * mean_row[j];
        if (has_noise) {
          for (std::size_t j = 0; j < p; ++j) noise[j] = perturb_rng.normal();
          for (std::size_t j = 0; j < p; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k <= j; ++k) {
              v += kernel_chol(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * noise[k];
            }
            dst[j] += v;
          }
        }
      }
      thetas.commit_identity();
    }

    for (std::size_t i = 0; i < n; ++i) {
      const auto x = states.emplace(i, t);
      if (t == 0) {
        model.sample_state_prior(prop_rng, thetas.current(i), x);
      } else {
        model.sample_transition(prop_rng, t, states.window(i, t), thetas.current(i), x);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      log_w[i] = detail::sanitize(model.obs_logpdf(t, y, states.state(i, t), thetas.current(i)));
    }
    detail::weight_diagnostics(log_w, states, t, scratch, result.state_mean[t], rec);

    resample(cfg.resample, log_w, resample_rng, ancestors, resample_ws);
    rec.distinct = count_distinct(ancestors);
    if (cfg.permute_seed != 0) detail::shuffle(perm, permute_rng);
    thetas.reindex(ancestors, perm);
    states.resample(ancestors, perm, t);

    if (p > 0) {
      summary.reset();
      for (std::size_t i = 0; i < n; ++i) summary.add_point(thetas.current(i), 1.0 / static_cast<double>(n));
      if (space.kind == ParamKind::continuous) {
        summary.finish_continuous(result.param_mean[t], result.param_cov[t]);
      } else {
        summary.finish_discrete(result.param_marginals[t]);
      }
    }
    result.log_evidence += rec.log_evidence_increment;
    meter.stop(rec);
  }

  if (p > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto th = thetas.current(i);
      result.final_components.push_back({1.0 / static_cast<double>(n), {th.begin(), th.end()}, {}});
    }
  }
  result.index_copies = states.index_copies();
  return result;
}

}  // namespace detail

/// Plain bootstrap particle filter: parameters are drawn from the prior at
/// t = 0 and only ever resampled, never rejuvenated.
template <DynamicModel Model>
RunResult bootstrap_pf_run(const Model& model, const Series& observations, const FilterConfig& cfg) {
  return detail::particle_filter(model, observations, cfg, 1.0, "pf");
}

/// Liu-West filter (artificial parameter dynamics with kernel shrinkage
/// a = cfg.shrinkage). Continuous parameters only.
template <DynamicModel Model>
RunResult liu_west_run(const Model& model, const Series& observations, const FilterConfig& cfg) {
  if (model.param_space().kind == ParamKind::discrete) {
    throw UnsupportedParamKindError("Liu-West kernel moves need continuous parameters");
  }
  return detail::particle_filter(model, observations, cfg, cfg.shrinkage, "liu-west");
}

/// Reusable bootstrap-filter estimate of log p(y_{0:T} | theta), the PMMH target.
template <DynamicModel Model>
class BootstrapLikelihood {
 public:
  BootstrapLikelihood(const Model& model, const Series& observations, std::size_t particles,
                      ResampleScheme scheme = ResampleScheme::multinomial)
      : model_(&model), obs_(&observations), n_(particles), scheme_(scheme),
        states_(particles, static_cast<std::size_t>(model.markov_order()), model.dims().state),
        log_w_(particles), ancestors_(particles), perm_(particles), resample_ws_(particles) {
    detail::check_observations(observations, model.dims());
    detail::identity(perm_);
  }

  /// Returns -inf when every particle dies at some step.
  double operator()(std::span<const double> theta, RngStream& rng) {
    double total = 0.0;
    for (std::size_t t = 0; t < obs_->size(); ++t) {
      const auto y = (*obs_)[t];
      for (std::size_t i = 0; i < n_; ++i) {
        const auto x = states_.emplace(i, t);
        if (t == 0) {
          model_->sample_state_prior(rng, theta, x);
        } else {
          model_->sample_transition(rng, t, states_.window(i, t), theta, x);
        }
        log_w_[i] = detail::sanitize(model_->obs_logpdf(t, y, x, theta));
      }
      const double lse = log_sum_exp(log_w_);
      if (lse == kNegInf) return kNegInf;
      total += lse - std::log(static_cast<double>(n_));
      if (t + 1 < obs_->size()) {
        resample(scheme_, log_w_, rng, ancestors_, resample_ws_);
        states_.resample(ancestors_, perm_, t);
      }
    }
    return total;
  }

 private:
  const Model* model_;
  const Series* obs_;
  std::size_t n_;
  ResampleScheme scheme_;
  StateStore states_;
  std::vector<double> log_w_;
  std::vector<std::uint32_t> ancestors_;
  std::vector<std::uint32_t> perm_;
  ResampleWorkspace resample_ws_;
};

}  // namespace adfsmc
