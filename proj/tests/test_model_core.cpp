#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <adfsmc/core/alloc_hook.hpp>
#include <adfsmc/core/model.hpp>
#include <adfsmc/core/rng.hpp>
#include <adfsmc/models/instances.hpp>

#include "support.hpp"

using namespace adfsmc;
using adfsmc::test::log_gauss;
using adfsmc::test::ScalarWindow;

namespace {

ParamVector scalar_theta(double v) { return {ParamKind::continuous, {v}}; }

}  // namespace

TEST(RngStream, SameKeySameSequence) {
  RngStream a(42, StreamId::kPropagate), b(42, StreamId::kPropagate);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a.normal(), b.normal());
}

TEST(RngStream, DistinctStreamsUncorrelated) {
  RngStream a(42, StreamId::kPropagate), b(42, StreamId::kResample);
  const int n = 100000;
  double sab = 0, saa = 0, sbb = 0;
  int equal = 0;
  for (int k = 0; k < n; ++k) {
    const double x = a.normal(), y = b.normal();
    equal += x == y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  EXPECT_EQ(equal, 0);
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 4.0 / std::sqrt(n));
}

TEST(AllocHook, CountsHeapAllocations) {
  ASSERT_TRUE(instr::hook_installed());
  const auto before = instr::heap_allocations();
  auto* v = new std::vector<double>(1000, 1.0);
  const auto after = instr::heap_allocations();
  EXPECT_GE(after - before, 2u);
  EXPECT_EQ((*v)[999], 1.0);
  delete v;
}

TEST(ParamLikelihood, PriorOnlyCaseAtTimeZero) {
  // Linear-Gaussian: y_0 and x_0 do not involve theta, so t_0 is the prior up to a constant.
  const auto model = models::lg_instance();
  const double x0 = 0.3, y0 = -0.2;
  const auto lik = make_param_likelihood(model, 0, std::span<const double>(&x0, 1), StateWindow{},
                                         std::span<const double>(&y0, 1));
  const double ref = lik(std::vector<double>{0.0}) - log_gauss(0.0, 0.0, 1.0);
  for (double th : {-2.0, -0.5, 0.7, 1.9}) {
    EXPECT_NEAR(lik(std::vector<double>{th}) - log_gauss(th, 0.0, 1.0), ref, 1e-12);
  }
}

TEST(ParamLikelihood, SinZeroPreviousStateIsFlat) {
  const auto model = models::sin_instance();
  const ScalarWindow w({0.0});
  const double x = 0.4, y = 0.1;
  const auto lik = make_param_likelihood(model, 3, std::span<const double>(&x, 1), w.view(),
                                         std::span<const double>(&y, 1));
  const double at0 = lik(std::vector<double>{0.0});
  for (double th : {-3.0, -0.5, 1.0, 2.5}) EXPECT_EQ(lik(std::vector<double>{th}), at0);
}

TEST(ParamLikelihood, SinWorkedValue) {
  const auto model = models::sin_instance();
  const ScalarWindow w({1.0});
  const double x = 0.2, y = 0.2;
  const auto lik = make_param_likelihood(model, 1, std::span<const double>(&x, 1), w.view(),
                                         std::span<const double>(&y, 1));
  const double expected = log_gauss(0.2, std::sin(-0.5), 1.0) + log_gauss(0.2, 0.2, 0.25);
  EXPECT_NEAR(lik(std::vector<double>{-0.5}), expected, 1e-14);
}

TEST(ParamLikelihood, RepeatedEvaluationIdentical) {
  const auto model = models::sin_bimodal_instance();
  const ScalarWindow w({0.8});
  const double x = -0.1, y = 0.3;
  const auto lik = make_param_likelihood(model, 5, std::span<const double>(&x, 1), w.view(),
                                         std::span<const double>(&y, 1));
  const std::vector<double> th{0.37};
  const double first = lik(th);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(lik(th), first);
}

TEST(ParamLikelihood, EqualsSumOfModelDensities) {
  RngStream rng(7, 0);
  const auto sin = models::sin_instance();
  const auto bimodal = models::sin_bimodal_instance();
  const auto lg = models::lg_instance();
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> th{rng.normal(0.0, 1.5)};
    const ScalarWindow w({rng.normal()});
    const double x = rng.normal(), y = rng.normal();
    const std::span<const double> xs(&x, 1), ys(&y, 1);
    auto check = [&](const auto& model) {
      const auto lik0 = make_param_likelihood(model, 0, xs, StateWindow{}, ys);
      const double ref0 = model.param_prior_logpdf(th) + model.obs_logpdf(0, ys, xs, th);
      EXPECT_NEAR(lik0(th), ref0, 1e-12);
      const auto lik = make_param_likelihood(model, 4, xs, w.view(), ys);
      const double ref = model.obs_logpdf(4, ys, xs, th) + model.transition_logpdf(4, xs, w.view(), th);
      EXPECT_NEAR(lik(th), ref, 1e-12);
    };
    check(sin);
    check(bimodal);
    check(lg);
  }

  const auto slam = models::slam_small_instance();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> map(8);
    slam.sample_param_prior(rng, map);
    const ScalarWindow w({static_cast<double>(rng.index(8))});
    const double x = static_cast<double>(rng.index(8)), y = static_cast<double>(rng.index(2));
    const std::span<const double> xs(&x, 1), ys(&y, 1);
    const std::size_t k = 1 + rng.index(16);
    const auto lik = make_param_likelihood(slam, k, xs, w.view(), ys);
    const double ref = slam.obs_logpdf(k, ys, xs, map) + slam.transition_logpdf(k, xs, w.view(), map);
    if (std::isinf(ref)) {
      EXPECT_EQ(lik(map), ref);
    } else {
      EXPECT_NEAR(lik(map), ref, 1e-12);
    }
  }
}

TEST(ParamLikelihood, RejectsMismatchedDimensions) {
  const auto model = models::sin_instance();
  const std::vector<double> two{0.1, 0.2};
  const double one = 0.1;
  const ScalarWindow w({0.5});
  const ScalarWindow long_w({0.5, 0.6});
  const std::span<const double> s1(&one, 1);
  EXPECT_THROW(make_param_likelihood(model, 1, two, w.view(), s1), DimensionError);
  EXPECT_THROW(make_param_likelihood(model, 1, s1, w.view(), two), DimensionError);
  EXPECT_THROW(make_param_likelihood(model, 2, s1, long_w.view(), s1), DimensionError);
  EXPECT_THROW(make_param_likelihood(model, 1, s1, StateWindow{}, s1), DimensionError);
  EXPECT_THROW(make_param_likelihood(model, 0, s1, w.view(), s1), DimensionError);
}

TEST(Simulate, ZeroStepsGivesOneStateAndObservation) {
  const auto traj = simulate(models::sin_instance(), scalar_theta(-0.5), 0, 1);
  EXPECT_EQ(traj.states.size(), 1u);
  EXPECT_EQ(traj.observations.size(), 1u);
}

TEST(Simulate, NoiselessSinRecursion) {
  models::SinModel::Config cfg;
  cfg.trans_sd = 0.0;
  const models::SinModel model(cfg);
  const ScalarWindow w({1.0});
  RngStream rng(1, 0);
  double x1 = 0.0;
  model.sample_transition(rng, 1, w.view(), std::vector<double>{-0.5}, std::span<double>(&x1, 1));
  EXPECT_EQ(x1, std::sin(-0.5));
}

TEST(Simulate, BitReproducible) {
  const auto a = simulate(models::sin_instance(), scalar_theta(-0.5), 500, 11);
  const auto b = simulate(models::sin_instance(), scalar_theta(-0.5), 500, 11);
  EXPECT_TRUE(a.states == b.states);
  EXPECT_TRUE(a.observations == b.observations);
  const auto c = simulate(models::sin_instance(), scalar_theta(-0.5), 500, 12);
  EXPECT_FALSE(a.observations == c.observations);
}

TEST(Simulate, SinSampleMeanMatchesLongRun) {
  const auto model = models::sin_instance();
  const std::size_t steps = 5000;
  const auto traj = simulate(model, scalar_theta(-0.5), steps, 42);
  double mean = 0.0;
  for (std::size_t t = 0; t <= steps; ++t) mean += traj.observations[t][0];
  mean /= static_cast<double>(steps + 1);

  const auto ref = simulate(model, scalar_theta(-0.5), 1000000, 4242);
  double long_mean = 0.0, long_sq = 0.0;
  for (std::size_t t = 0; t < ref.observations.size(); ++t) {
    const double y = ref.observations[t][0];
    long_mean += y;
    long_sq += y * y;
  }
  const double n = static_cast<double>(ref.observations.size());
  long_mean /= n;
  const double sd = std::sqrt(long_sq / n - long_mean * long_mean);
  EXPECT_LT(std::abs(mean - long_mean), 3.0 * sd / std::sqrt(static_cast<double>(steps)));
}

TEST(Simulate, ValidatesParameter) {
  EXPECT_THROW(simulate(models::sin_instance(), ParamVector{ParamKind::continuous, {1.0, 2.0}}, 3, 1),
               DimensionError);
  EXPECT_THROW(simulate(models::slam_small_instance(), ParamVector{ParamKind::discrete, std::vector<double>(8, 2.0)}, 3, 1),
               DimensionError);
}
