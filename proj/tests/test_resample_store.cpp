#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <adfsmc/filter/particle_store.hpp>
#include <adfsmc/filter/resample.hpp>

using namespace adfsmc;

namespace {

std::vector<double> logs(std::initializer_list<double> linear) {
  std::vector<double> out;
  for (double w : linear) out.push_back(std::log(w));
  return out;
}

}  // namespace

TEST(Resample, UniformWeightsUniformFrequencies) {
  RngStream rng(1, StreamId::kResample);
  const auto lw = logs({1, 1, 1, 1});
  std::vector<int> counts(4, 0);
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) {
    for (auto a : multinomial_resample(lw, rng)) ++counts[a];
  }
  const double n = 4.0 * reps;
  for (int c : counts) EXPECT_LT(std::abs(c / n - 0.25), 3.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST(Resample, PointMass) {
  RngStream rng(2, StreamId::kResample);
  const auto a = multinomial_resample(logs({0, 0, 1, 0}), rng);
  for (auto i : a) EXPECT_EQ(i, 2u);
}

TEST(Resample, ChiSquareAgainstMultinomialExpectation) {
  RngStream rng(3, StreamId::kResample);
  const std::size_t n = 100000;
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) lw[i] = std::log(static_cast<double>(i % 4 + 1));
  const auto a = multinomial_resample(lw, rng);
  double counts[4] = {0, 0, 0, 0};
  for (auto i : a) counts[i % 4] += 1;
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double e = 0.1 * (k + 1) * n;
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
  }
  EXPECT_LT(chi2, 11.345);  // chi-square(3) at alpha = 0.01
}

TEST(Resample, OutputSorted) {
  RngStream rng(4, StreamId::kResample);
  std::vector<double> lw(1000);
  for (auto& v : lw) v = rng.normal(0.0, 3.0);
  for (auto scheme : {ResampleScheme::multinomial, ResampleScheme::systematic}) {
    std::vector<std::uint32_t> a(lw.size());
    ResampleWorkspace ws(lw.size());
    resample(scheme, lw, rng, a, ws);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_LT(a.back(), lw.size());
  }
}

TEST(Resample, SystematicCountsWithinOne) {
  RngStream rng(5, StreamId::kResample);
  const auto lw = logs({1, 2, 3, 4, 0.5, 7.5});
  const double total = 18.0;
  const std::size_t n = 36;
  for (int r = 0; r < 100; ++r) {
    std::vector<std::uint32_t> out(n);
    ResampleWorkspace w(lw.size(), n);
    systematic_resample(lw, rng, out, w);
    std::vector<int> counts(lw.size(), 0);
    for (auto i : out) ++counts[i];
    for (std::size_t i = 0; i < lw.size(); ++i) {
      EXPECT_LE(std::abs(counts[i] - std::exp(lw[i]) / total * n), 1.0 + 1e-9);
    }
  }
}

TEST(Resample, AllWeightsZeroIsFatal) {
  RngStream rng(6, StreamId::kResample);
  const std::vector<double> lw(5, kNegInf);
  EXPECT_THROW(multinomial_resample(lw, rng), DegenerateWeightsError);
}

TEST(Ess, ReferenceValues) {
  EXPECT_NEAR(ess(std::vector<double>(10, -3.0)), 10.0, 1e-12);
  EXPECT_NEAR(ess(logs({0, 0, 5, 0})), 1.0, 1e-12);
  EXPECT_NEAR(ess(logs({1, 1, 2})), 16.0 / 6.0, 1e-12);
}

TEST(CountDistinct, SortedRuns) {
  const std::vector<std::uint32_t> a{0, 0, 3, 3, 3, 4, 9};
  EXPECT_EQ(count_distinct(a), 4u);
}

TEST(StateStore, WindowFollowsAncestry) {
  const std::size_t n = 3, order = 2;
  StateStore store(n, order, 1);
  std::vector<std::uint32_t> identity{0, 1, 2};
  // t = 0, 1: particle i holds 10 t + i.
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t i = 0; i < n; ++i) store.emplace(i, t)[0] = 10.0 * t + i;
    store.resample(identity, identity, t);
  }
  const auto w = store.window(1, 2);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0][0], 1.0);
  EXPECT_EQ(w[1][0], 11.0);
  EXPECT_EQ(store.window(0, 1).size(), 1u);
  EXPECT_EQ(store.window(0, 0).size(), 0u);

  for (std::size_t i = 0; i < n; ++i) store.emplace(i, 2)[0] = 20.0 + i;
  // Everyone descends from particle 2; child slots permuted.
  const std::vector<std::uint32_t> anc{2, 2, 2}, perm{2, 0, 1};
  const double* payload = store.state(2, 2).data();
  store.resample(anc, perm, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto win = store.window(i, 3);
    EXPECT_EQ(win[0][0], 12.0);
    EXPECT_EQ(win[1][0], 22.0);
    EXPECT_EQ(win[1].data(), payload);  // shared, not copied
  }
}

TEST(StateStore, CopiesExactlyNTimesDIndexEntries) {
  for (std::size_t order : {1u, 2u, 3u}) {
    const std::size_t n = 50;
    StateStore store(n, order, 2);
    RngStream rng(7, 0);
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    const std::size_t steps = 9;
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<double> lw(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto x = store.emplace(i, t);
        x[0] = x[1] = rng.normal();
        lw[i] = x[0];
      }
      store.resample(multinomial_resample(lw, rng), perm, t);
      EXPECT_EQ(store.index_copies(), (t + 1) * n * order);
    }
  }
}

TEST(HandleSlab, CommitPointsChildrenAtStagedAncestors) {
  HandleSlab<int> slab(4, 0);
  for (std::size_t u = 0; u < 4; ++u) slab.live_slot(u) = static_cast<int>(u);
  // Stage updates only for the surviving ancestors 1 and 3.
  slab.staging(1) = 100;
  slab.staging(3) = 300;
  const std::vector<std::uint32_t> anc{1, 1, 3, 3}, perm{3, 2, 1, 0};
  slab.commit(anc, perm);
  EXPECT_EQ(slab.current(3), 100);
  EXPECT_EQ(slab.current(2), 100);
  EXPECT_EQ(slab.current(1), 300);
  EXPECT_EQ(slab.current(0), 300);
  EXPECT_EQ(slab.handle(0), 3u);
}
