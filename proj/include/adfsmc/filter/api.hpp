#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <adfsmc/approx/param_approx.hpp>
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

/// Assumed Parameter Inference: a bootstrap particle filter over states in
/// which every particle carries its own assumed-density posterior q^i(theta).
///
/// Per step t: draw theta^i ~ q^i, propagate x^i with the transition (the
/// state prior at t = 0), weight by p(y_t | x^i_t, theta^i), resample, and
/// project t_t(theta) q^i(theta) back onto the family. With
/// UpdateOrder::resample_first the projection runs once per distinct
/// ancestor and the children share the result through their handles.
///
/// Every buffer is sized before the first step; the loop itself does not
/// touch the heap.
template <class Approx, DynamicModel Model>
RunResult api_run(const Model& model, const Series& observations, const FilterConfig& cfg) {
  using Traits = ApproxTraits<Approx>;
  cfg.validate();
  const Dims dims = model.dims();
  const ParamSpace& space = model.param_space();
  detail::check_observations(observations, dims);
  if (space.kind != Traits::kKind) {
    throw UnsupportedParamKindError(std::string(Traits::kName) + " approximation cannot represent " +
                                    to_string(space.kind) + " parameters");
  }
  if (space.dim == 0) throw ConfigError("parameter inference needs a parameter of dimension >= 1");

  const std::size_t n = cfg.particles;
  const std::size_t p = space.dim;
  const std::size_t order = static_cast<std::size_t>(model.markov_order());
  const std::size_t steps = observations.size();

  RngStream init_rng(cfg.seed, StreamId::kInit);
  RngStream draw_rng(cfg.seed, StreamId::kParamDraw);
  RngStream prop_rng(cfg.seed, StreamId::kPropagate);
  RngStream resample_rng(cfg.seed, StreamId::kResample);
  RngStream update_rng(cfg.seed, StreamId::kUpdate);
  RngStream permute_rng(cfg.permute_seed, StreamId::kPerturb);

  const Approx proto = Traits::prior(model, cfg.approx, init_rng);
  HandleSlab<Approx> approx(n, proto);
  for (std::size_t i = 1; i < n; ++i) approx.live_slot(i) = Traits::prior(model, cfg.approx, init_rng);
  auto workspace = Traits::workspace(proto, cfg.approx);

  StateStore states(n, order, dims.state);
  std::vector<double> theta(n * p);
  std::vector<double> log_w(n);
  std::vector<double> scratch(n);
  std::vector<std::uint32_t> ancestors(n);
  std::vector<std::uint32_t> perm(n);
  std::vector<std::uint32_t> counts(n, 0);
  ResampleWorkspace resample_ws(n);
  ParamSummary summary = ParamSummary::for_space(space);
  detail::identity(perm);

  RunResult result;
  result.algorithm = "api";
  result.kind = space.kind;
  result.param_dim = p;
  result.cardinalities = space.cardinalities;
  result.steps.resize(steps);
  result.state_mean = Series(dims.state);
  result.state_mean.resize(steps);
  if (space.kind == ParamKind::continuous) {
    result.param_mean = Series(p);
    result.param_mean.resize(steps);
    result.param_cov = Series(p * p);
    result.param_cov.resize(steps);
  } else {
    result.param_marginals = Series(summary.table_size());
    result.param_marginals.resize(steps);
  }

  StepMeter meter(cfg.record_timing);
  auto theta_of = [&](std::size_t i) { return std::span<double>(theta.data() + i * p, p); };

  for (std::size_t t = 0; t < steps; ++t) {
    meter.start();
    StepRecord& rec = result.steps[t];
    rec.t = t;
    const auto y = observations[t];
    const PriorTerm prior_term = t == 0 ? PriorTerm::exclude : PriorTerm::include;

    for (std::size_t i = 0; i < n; ++i) approx_sample(approx.current(i), draw_rng, theta_of(i));

    for (std::size_t i = 0; i < n; ++i) {
      const auto x = states.emplace(i, t);
      if (t == 0) {
        model.sample_state_prior(prop_rng, theta_of(i), x);
      } else {
        model.sample_transition(prop_rng, t, states.window(i, t), theta_of(i), x);
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      log_w[i] = detail::sanitize(model.obs_logpdf(t, y, states.state(i, t), theta_of(i)));
    }
    detail::weight_diagnostics(log_w, states, t, scratch, result.state_mean[t], rec);

    // q^u_t from q^u_{t-1} and particle u's (x_t, window, y_t), into staging slot u.
    auto update = [&](std::size_t u) {
      const ParamLikelihood<Model> lik(model, t, states.state(u, t), states.window(u, t), y, prior_term);
      const UpdateStatus status =
          Traits::update(approx.current(u), lik, update_rng, workspace, approx.staging(u));
      ++rec.updates;
      if (status == UpdateStatus::degenerate) ++rec.degenerate;
    };

    if (cfg.order == UpdateOrder::update_first) {
      for (std::size_t i = 0; i < n; ++i) update(i);
    }
    resample(cfg.resample, log_w, resample_rng, ancestors, resample_ws);
    rec.distinct = count_distinct(ancestors);
    if (cfg.order == UpdateOrder::resample_first) {
      // Ancestors are sorted, so each distinct one is the first of its run.
      for (std::size_t k = 0; k < n; ++k) {
        if (k == 0 || ancestors[k] != ancestors[k - 1]) update(ancestors[k]);
      }
    }
    if (cfg.permute_seed != 0) detail::shuffle(perm, permute_rng);
    approx.commit(ancestors, perm);
    states.resample(ancestors, perm, t);

    summary.reset();
    for (std::size_t i = 0; i < n; ++i) ++counts[approx.handle(i)];
    for (std::size_t u = 0; u < n; ++u) {
      if (counts[u] == 0) continue;
      summary.add(approx.live_slot(u), static_cast<double>(counts[u]) / static_cast<double>(n));
      if (t + 1 < steps) counts[u] = 0;
    }
    if (space.kind == ParamKind::continuous) {
      summary.finish_continuous(result.param_mean[t], result.param_cov[t]);
    } else {
      summary.finish_discrete(result.param_marginals[t]);
    }
    result.log_evidence += rec.log_evidence_increment;
    meter.stop(rec);
  }

  // counts still holds the final multiplicities.
  for (std::size_t u = 0; u < n; ++u) {
    if (counts[u] == 0) continue;
    detail::append_components(approx.live_slot(u), static_cast<double>(counts[u]) / static_cast<double>(n),
                              result.final_components);
  }
  result.index_copies = states.index_copies();
  return result;
}

/// Runtime dispatch over the approximation family.
template <DynamicModel Model>
RunResult api_run(const Model& model, const Series& observations, const FilterConfig& cfg, ApproxFamily family) {
  switch (family) {
    case ApproxFamily::gaussian: return api_run<GaussianApprox>(model, observations, cfg);
    case ApproxFamily::mixture: return api_run<MixtureApprox>(model, observations, cfg);
    case ApproxFamily::discrete: return api_run<FactorizedDiscreteApprox>(model, observations, cfg);
  }
  throw ConfigError("unknown approximation family");
}

}  // namespace adfsmc
