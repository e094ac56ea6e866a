#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include <adfsmc/core/alloc_hook.hpp>
#include <adfsmc/filter/api.hpp>
#include <adfsmc/filter/bootstrap.hpp>
#include <adfsmc/models/instances.hpp>
#include <adfsmc/oracles/grid_posterior.hpp>
#include <adfsmc/oracles/kalman.hpp>
#include <adfsmc/oracles/metrics.hpp>

#include "support.hpp"

using namespace adfsmc;
using adfsmc::test::FlatModel;

namespace {

/// Two-state Markov chain x_t in {0, 1} (stay 0.8); y_t ~ N(0.5 theta + x_t, 0.5^2)
/// with a single discrete parameter theta in {0, 1, 2}.
struct SwitchModel {
  ParamSpace space;
  SwitchModel() {
    space.kind = ParamKind::discrete;
    space.dim = 1;
    space.cardinalities = {3};
  }
  Dims dims() const { return {1, 1, 1}; }
  std::size_t markov_order() const { return 1; }
  const ParamSpace& param_space() const { return space; }
  bool obs_depends_on_param() const { return true; }
  bool transition_depends_on_param() const { return false; }
  bool state_prior_depends_on_param() const { return false; }
  void sample_param_prior(RngStream& rng, std::span<double> th) const { th[0] = static_cast<double>(rng.index(3)); }
  double param_prior_logpdf(std::span<const double>) const { return -std::log(3.0); }
  void sample_state_prior(RngStream& rng, std::span<const double>, std::span<double> x) const {
    x[0] = static_cast<double>(rng.index(2));
  }
  double state_prior_logpdf(std::span<const double>, std::span<const double>) const { return -std::log(2.0); }
  void sample_transition(RngStream& rng, std::size_t, StateWindow w, std::span<const double>, std::span<double> x) const {
    const double prev = w.newest()[0];
    x[0] = rng.uniform() < 0.8 ? prev : 1.0 - prev;
  }
  double transition_logpdf(std::size_t, std::span<const double> x, StateWindow w, std::span<const double>) const {
    return std::log(x[0] == w.newest()[0] ? 0.8 : 0.2);
  }
  void sample_obs(RngStream& rng, std::size_t, std::span<const double> x, std::span<const double> th,
                  std::span<double> y) const {
    y[0] = rng.normal(0.5 * th[0] + x[0], 0.5);
  }
  double obs_logpdf(std::size_t, std::span<const double> y, std::span<const double> x, std::span<const double> th) const {
    return normal_logpdf(y[0], 0.5 * th[0] + x[0], 0.5);
  }
};

/// Exact p(theta | y_{0:T}) for SwitchModel by the forward algorithm per theta.
std::vector<double> switch_posterior(const Series& obs) {
  std::vector<double> log_post(3);
  for (int th = 0; th < 3; ++th) {
    double a[2] = {0.5, 0.5};
    double loglik = 0.0;
    for (std::size_t t = 0; t < obs.size(); ++t) {
      if (t > 0) {
        const double b0 = 0.8 * a[0] + 0.2 * a[1], b1 = 0.2 * a[0] + 0.8 * a[1];
        a[0] = b0;
        a[1] = b1;
      }
      for (int x = 0; x < 2; ++x) a[x] *= std::exp(test::log_gauss(obs[t][0], 0.5 * th + x, 0.25));
      const double z = a[0] + a[1];
      loglik += std::log(z);
      a[0] /= z;
      a[1] /= z;
    }
    log_post[th] = loglik;
  }
  const double m = *std::max_element(log_post.begin(), log_post.end());
  double z = 0.0;
  for (double& v : log_post) z += (v = std::exp(v - m));
  for (double& v : log_post) v /= z;
  return log_post;
}

Series sin_data(double theta, std::size_t steps, std::uint64_t seed, const models::SinModel& model = models::sin_instance()) {
  return simulate(model, ParamVector{ParamKind::continuous, {theta}}, steps, seed).observations;
}

FilterConfig make_config(std::size_t n, std::uint64_t seed, std::size_t m = 7) {
  FilterConfig cfg;
  cfg.particles = n;
  cfg.seed = seed;
  cfg.approx.scheme = MomentScheme::gauss_hermite(m);
  cfg.record_timing = false;
  return cfg;
}

}  // namespace

TEST(Api, FlatLikelihoodKeepsPrior) {
  const FlatModel model;
  Series obs(1);
  for (int t = 0; t < 30; ++t) obs.push_back(std::vector<double>{0.0});
  const auto res = api_run<GaussianApprox>(model, obs, make_config(50, 3));
  for (std::size_t t = 0; t < obs.size(); ++t) {
    EXPECT_NEAR(res.param_mean[t][0], 0.3, 1e-10);
    EXPECT_NEAR(res.param_cov[t][0], 2.0, 1e-10);
  }
  // Mixture components keep the prior shape and their equal weights.
  FilterConfig cfg = make_config(20, 3);
  cfg.approx.mixture_size = 3;
  const auto mix = api_run<MixtureApprox>(model, obs, cfg);
  for (const auto& c : mix.final_components) {
    EXPECT_NEAR(c.cov[0], 2.0, 1e-10);
    const double units = c.weight * 3.0 * 20.0;  // multiplicity of the owning particle
    EXPECT_NEAR(units, std::round(units), 1e-9);
  }
}

TEST(Api, OneStepLinearGaussianIsConjugate) {
  const auto model = models::lg_instance();
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto obs = simulate(model, ParamVector{ParamKind::continuous, {0.5}}, 1, seed).observations;
    const auto res = api_run<GaussianApprox>(model, obs, make_config(1, seed, 60));
    // N = 1: the fused summary is the particle's own q, and state_mean its path.
    const double x0 = res.state_mean[0][0], x1 = res.state_mean[1][0];
    // prior N(0, 1) times N(x1; theta x0, 1) as a function of theta.
    const double prec = 1.0 + x0 * x0;
    EXPECT_NEAR(res.param_mean[0][0], 0.0, 1e-12);
    EXPECT_NEAR(res.param_cov[0][0], 1.0, 1e-12);
    EXPECT_NEAR(res.param_mean[1][0], x0 * x1 / prec, 1e-6);
    EXPECT_NEAR(res.param_cov[1][0], 1.0 / prec, 1e-6);
  }
}

TEST(Api, DeterministicGivenSeed) {
  const auto obs = sin_data(-0.5, 100, 5);
  FilterConfig cfg = make_config(100, 9);
  const auto a = api_run<GaussianApprox>(models::sin_instance(), obs, cfg);
  const auto b = api_run<GaussianApprox>(models::sin_instance(), obs, cfg);
  EXPECT_TRUE(a.param_mean == b.param_mean);
  EXPECT_TRUE(a.param_cov == b.param_cov);
  EXPECT_TRUE(a.state_mean == b.state_mean);
}

TEST(Api, ResampleFirstUpdatesOncePerDistinctAncestor) {
  const auto obs = sin_data(-0.5, 60, 2);
  const auto res = api_run<GaussianApprox>(models::sin_instance(), obs, make_config(300, 4));
  for (const auto& s : res.steps) {
    EXPECT_EQ(s.updates, s.distinct);
    EXPECT_LE(s.updates, 300u);
  }
  FilterConfig cfg = make_config(300, 4);
  cfg.order = UpdateOrder::update_first;
  const auto naive = api_run<GaussianApprox>(models::sin_instance(), obs, cfg);
  for (const auto& s : naive.steps) EXPECT_EQ(s.updates, 300u);
}

TEST(Api, SkewedWeightsNeedFarFewerUpdates) {
  models::SinModel::Config sharp;
  sharp.obs_sd = 0.01;
  const models::SinModel model(sharp);
  const auto obs = sin_data(-0.5, 100, 6, model);
  const std::size_t n = 500;
  const auto res = api_run<GaussianApprox>(model, obs, make_config(n, 6));
  double mean_updates = 0.0;
  for (const auto& s : res.steps) mean_updates += static_cast<double>(s.updates);
  mean_updates /= static_cast<double>(res.steps.size());
  EXPECT_LT(mean_updates, n / 2.0);
}

TEST(Api, UpdateOrdersAgreeOnSin) {
  // Paired seeds: same data, same N, the two orders differ only in when the projection runs.
  std::vector<double> diffs;
  double err_rf = 0.0, err_uf = 0.0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto obs = sin_data(-0.5, 500, 100 + seed);
    FilterConfig cfg = make_config(200, seed);
    const double a = api_run<GaussianApprox>(models::sin_instance(), obs, cfg).final_param_mean()[0];
    cfg.order = UpdateOrder::update_first;
    const double b = api_run<GaussianApprox>(models::sin_instance(), obs, cfg).final_param_mean()[0];
    diffs.push_back(a - b);
    err_rf += (a + 0.5) * (a + 0.5);
    err_uf += (b + 0.5) * (b + 0.5);
  }
  const double n = static_cast<double>(diffs.size());
  const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  double var = 0.0;
  for (double d : diffs) var += (d - mean) * (d - mean);
  var /= n - 1;
  const double se = std::sqrt(var / n);
  EXPECT_LE(std::abs(mean), 3.0 * se + 1e-3) << "mean paired difference " << mean << " se " << se;
  EXPECT_LT(err_rf / n, 0.01);
  EXPECT_LT(err_uf / n, 0.01);
}

TEST(Api, PermutingParticleSlotsLeavesDistributionUnchanged) {
  const auto obs = sin_data(-0.5, 300, 77);
  std::vector<double> plain, permuted;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FilterConfig cfg = make_config(100, seed);
    plain.push_back(api_run<GaussianApprox>(models::sin_instance(), obs, cfg).final_param_mean()[0]);
    cfg.permute_seed = 1000 + seed;
    permuted.push_back(api_run<GaussianApprox>(models::sin_instance(), obs, cfg).final_param_mean()[0]);
  }
  auto moments = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, s / static_cast<double>(v.size() - 1)};
  };
  const auto [m1, v1] = moments(plain);
  const auto [m2, v2] = moments(permuted);
  const double se = std::sqrt((v1 + v2) / 20.0);
  EXPECT_LT(std::abs(m1 - m2), 3.0 * se + 1e-4);
  EXPECT_LT(std::max(v1, v2) / std::min(v1, v2), 5.0);
}

TEST(Api, DiscreteParameterConvergesToExactPosterior) {
  const SwitchModel model;
  const auto obs = simulate(model, ParamVector{ParamKind::discrete, {1.0}}, 30, 21).observations;
  const auto exact = switch_posterior(obs);
  FilterConfig cfg = make_config(10000, 5);
  cfg.approx.scheme = MomentScheme::monte_carlo(3);  // joint cardinality 3: exhaustive
  const auto res = api_run<FactorizedDiscreteApprox>(model, obs, cfg);
  const auto est = res.final_marginals();
  ASSERT_EQ(est.size(), 1u);
  EXPECT_LT(total_variation(est[0], exact), 0.05);
}

TEST(Api, ZeroSteadyStateAllocations) {
  ASSERT_TRUE(instr::hook_installed());
  const auto obs = sin_data(-0.5, 40, 1);
  FilterConfig cfg = make_config(200, 1);
  cfg.record_timing = true;
  EXPECT_EQ(api_run<GaussianApprox>(models::sin_instance(), obs, cfg).steady_state_allocations(), 0u);
  cfg.approx.mixture_size = 4;
  EXPECT_EQ(api_run<MixtureApprox>(models::sin_instance(), obs, cfg).steady_state_allocations(), 0u);
  cfg.approx.scheme = MomentScheme::monte_carlo(50);
  EXPECT_EQ(api_run<GaussianApprox>(models::sin_instance(), obs, cfg).steady_state_allocations(), 0u);
  cfg.approx.scheme = MomentScheme::unscented();
  EXPECT_EQ(api_run<GaussianApprox>(models::sin_instance(), obs, cfg).steady_state_allocations(), 0u);

  const auto slam = models::slam_small_instance();
  const auto slam_obs =
      simulate(slam, ParamVector{ParamKind::discrete, {0, 1, 1, 0, 1, 0, 0, 1}}, slam.steps(), 3).observations;
  cfg.approx.scheme = MomentScheme::monte_carlo(50);
  EXPECT_EQ(api_run<FactorizedDiscreteApprox>(slam, slam_obs, cfg).steady_state_allocations(), 0u);

  EXPECT_EQ(bootstrap_pf_run(models::sin_instance(), obs, cfg).steady_state_allocations(), 0u);
  EXPECT_EQ(liu_west_run(models::sin_instance(), obs, cfg).steady_state_allocations(), 0u);
  EXPECT_EQ(bootstrap_pf_run(slam, slam_obs, cfg).steady_state_allocations(), 0u);
}

TEST(Api, RejectsIncompatibleInputs) {
  const auto obs = sin_data(-0.5, 5, 1);
  EXPECT_THROW(api_run<FactorizedDiscreteApprox>(models::sin_instance(), obs, make_config(10, 1)),
               UnsupportedParamKindError);
  EXPECT_THROW(api_run<GaussianApprox>(models::sin_instance(), Series(1), make_config(10, 1)), ConfigError);
  EXPECT_THROW(api_run<GaussianApprox>(models::sin_instance(), Series(2, std::vector<double>{0, 0}), make_config(10, 1)),
               DimensionError);
  EXPECT_THROW(api_run<GaussianApprox>(models::sin_instance(), obs, make_config(0, 1)), ConfigError);
}

TEST(Api, ImpossibleObservationAborts) {
  models::SlamModel::Config cfg = models::slam_small_config();
  cfg.p_obs = 1.0;
  const models::SlamModel model(cfg);
  Series obs(1);
  obs.push_back(std::vector<double>{5.0});  // label 5 never occurs with 2 labels
  EXPECT_THROW(api_run<FactorizedDiscreteApprox>(model, obs, make_config(10, 1)), DegenerateWeightsError);
  EXPECT_THROW(bootstrap_pf_run(model, obs, make_config(10, 1)), DegenerateWeightsError);
}

TEST(Pf, StateMeansMatchKalman) {
  models::LinearGaussianModel::Config mc;
  mc.sigma_v = 1.0;
  mc.sigma_w = 0.5;
  mc.known_theta = 0.8;
  const models::LinearGaussianModel model(mc);
  const auto obs = simulate(model, ParamVector{ParamKind::continuous, {}}, 100, 31).observations;
  const auto kf = oracles::kalman_filter(0.8, 1.0, 0.5, 1.0, obs);
  const std::size_t n = 20000;
  const auto res = bootstrap_pf_run(model, obs, make_config(n, 8));
  int outside = 0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    outside += std::abs(res.state_mean[t][0] - kf.mean[t]) > 3.0 * std::sqrt(kf.variance[t] / n);
  }
  // 3-sigma band per step; allow the handful of excursions expected over 101 steps.
  EXPECT_LE(outside, 3);
}

TEST(Pf, SingleParticleHasUnitEss) {
  const auto obs = sin_data(-0.5, 50, 3);
  const auto res = bootstrap_pf_run(models::sin_instance(), obs, make_config(1, 2));
  ASSERT_EQ(res.steps.size(), obs.size());
  for (const auto& s : res.steps) EXPECT_EQ(s.ess, 1.0);
}

TEST(LiuWest, UnitShrinkageIsBootstrapFilter) {
  const auto obs = sin_data(-0.5, 200, 4);
  FilterConfig cfg = make_config(300, 12);
  cfg.shrinkage = 1.0;
  const auto lw = liu_west_run(models::sin_instance(), obs, cfg);
  const auto pf = bootstrap_pf_run(models::sin_instance(), obs, cfg);
  EXPECT_TRUE(lw.state_mean == pf.state_mean);
  EXPECT_TRUE(lw.param_mean == pf.param_mean);
  EXPECT_TRUE(lw.param_cov == pf.param_cov);
}

TEST(LiuWest, RejectsDiscreteParameters) {
  const auto slam = models::slam_small_instance();
  Series obs(1);
  obs.push_back(std::vector<double>{0.0});
  EXPECT_THROW(liu_west_run(slam, obs, make_config(10, 1)), UnsupportedParamKindError);
}

TEST(LiuWest, LinearGaussianNearGridPosterior) {
  const auto model = models::lg_instance();
  const auto obs = simulate(model, ParamVector{ParamKind::continuous, {0.5}}, 200, 13).observations;
  const auto grid = oracles::grid_posterior(model, obs, oracles::uniform_grid(-1.5, 1.5, 601));
  const auto res = liu_west_run(model, obs, make_config(10000, 3));
  EXPECT_NEAR(res.final_param_mean()[0], grid.mean(), 0.1);
}

TEST(Pf, ParameterCloudNeverRejuvenates) {
  // Without rejuvenation the set of distinct theta values can only shrink.
  const auto obs = sin_data(-0.5, 100, 4);
  const auto res = bootstrap_pf_run(models::sin_instance(), obs, make_config(500, 2));
  std::vector<double> finals;
  for (const auto& c : res.final_components) finals.push_back(c.mean[0]);
  std::sort(finals.begin(), finals.end());
  const auto distinct = std::unique(finals.begin(), finals.end()) - finals.begin();
  EXPECT_LT(distinct, 500);
}
