#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <adfsmc/approx/gaussian.hpp>
#include <adfsmc/approx/scheme.hpp>

#include "support.hpp"

using namespace adfsmc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

double weighted_power(const PointSet& ps, int r) {
  double s = 0.0;
  for (std::size_t j = 0; j < ps.count; ++j) {
    s += ps.weights(static_cast<Eigen::Index>(j)) * std::pow(ps.points(0, static_cast<Eigen::Index>(j)), r);
  }
  return s;
}

// Size of the terms summed for E[X^r]; odd central moments are zero, so the
// relative tolerance is taken against this.
double absolute_power(const PointSet& ps, int r) {
  double s = 0.0;
  for (std::size_t j = 0; j < ps.count; ++j) {
    s += ps.weights(static_cast<Eigen::Index>(j)) * std::pow(std::abs(ps.points(0, static_cast<Eigen::Index>(j))), r);
  }
  return s;
}

}  // namespace

TEST(GaussHermite, TwoPointRule) {
  const auto ps = gauss_hermite_points(vec({0.0}), Eigen::MatrixXd::Identity(1, 1), 2);
  ASSERT_EQ(ps.count, 2u);
  EXPECT_NEAR(ps.points(0, 0), -1.0, 1e-14);
  EXPECT_NEAR(ps.points(0, 1), 1.0, 1e-14);
  EXPECT_NEAR(ps.weights(0), 0.5, 1e-14);
  EXPECT_NEAR(ps.weights(1), 0.5, 1e-14);
  EXPECT_NEAR(weighted_power(ps, 2), 1.0, 1e-14);
}

TEST(GaussHermite, SixthMomentWithFourPoints) {
  const auto ps = gauss_hermite_points(vec({0.0}), Eigen::MatrixXd::Identity(1, 1), 4);
  EXPECT_NEAR(weighted_power(ps, 6), 15.0, 1e-10);
}

TEST(GaussHermite, ExactUpToDegreeTwoMMinusOne) {
  for (std::size_t m : {2u, 3u, 4u, 7u, 10u}) {
    for (auto [mu, sd] : {std::pair{0.0, 1.0}, std::pair{1.5, 0.7}, std::pair{-2.0, 2.5}}) {
      Eigen::MatrixXd cov(1, 1);
      cov(0, 0) = sd * sd;
      const auto ps = gauss_hermite_points(vec({mu}), cov, m);
      double wsum = 0.0;
      for (std::size_t j = 0; j < ps.count; ++j) {
        EXPECT_GT(ps.weights(static_cast<Eigen::Index>(j)), 0.0);
        wsum += ps.weights(static_cast<Eigen::Index>(j));
      }
      EXPECT_NEAR(wsum, 1.0, 1e-14);
      for (int r = 0; r <= static_cast<int>(2 * m - 1); ++r) {
        const double exact = test::normal_raw_moment(r, mu, sd);
        const double got = weighted_power(ps, r);
        const double scale = std::max({1.0, std::abs(exact), absolute_power(ps, r)});
        EXPECT_LE(std::abs(got - exact), 1e-9 * scale)
            << "M=" << m << " r=" << r << " mu=" << mu << " sd=" << sd;
      }
    }
  }
}

TEST(GaussHermite, TensorGridReproducesMoments) {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const Eigen::VectorXd mu = vec({0.5, -1.0});
  const auto ps = gauss_hermite_points(mu, cov, 5);
  ASSERT_EQ(ps.count, 25u);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(2);
  for (std::size_t j = 0; j < ps.count; ++j) m += ps.weights(static_cast<Eigen::Index>(j)) * ps.points.col(static_cast<Eigen::Index>(j));
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  for (std::size_t j = 0; j < ps.count; ++j) {
    const Eigen::VectorXd d = ps.points.col(static_cast<Eigen::Index>(j)) - mu;
    c += ps.weights(static_cast<Eigen::Index>(j)) * d * d.transpose();
  }
  EXPECT_LT((m - mu).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((c - cov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GaussHermite, BudgetExceeded) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(6);
  EXPECT_THROW(gauss_hermite_points(mu, Eigen::MatrixXd::Identity(6, 6), 7), BudgetError);
  EXPECT_EQ(resolve_scheme(MomentScheme::gauss_hermite(7), 6).kind, MomentScheme::Kind::unscented);
  EXPECT_EQ(resolve_scheme(MomentScheme::gauss_hermite(7), 4).kind, MomentScheme::Kind::gauss_hermite);
}

TEST(Unscented, ScalarPoints) {
  Eigen::MatrixXd cov(1, 1);
  cov(0, 0) = 4.0;
  const auto ps = unscented_points(vec({2.0}), cov);
  ASSERT_EQ(ps.count, 2u);
  std::vector<double> pts{ps.points(0, 0), ps.points(0, 1)};
  std::sort(pts.begin(), pts.end());
  EXPECT_NEAR(pts[0], 0.0, 1e-14);
  EXPECT_NEAR(pts[1], 4.0, 1e-14);
  EXPECT_NEAR(ps.weights(0), 0.5, 1e-15);
}

TEST(Unscented, IdentityInTwoDimensions) {
  const auto ps = unscented_points(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  ASSERT_EQ(ps.count, 4u);
  const double r = std::sqrt(2.0);
  int found = 0;
  for (Eigen::Index j = 0; j < 4; ++j) {
    const Eigen::VectorXd x = ps.points.col(j);
    for (int axis = 0; axis < 2; ++axis) {
      for (double sign : {-1.0, 1.0}) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
        e(axis) = sign * r;
        found += (x - e).norm() < 1e-14;
      }
    }
    EXPECT_NEAR(ps.weights(j), 0.25, 1e-15);
  }
  EXPECT_EQ(found, 4);
}

TEST(Unscented, ReproducesMeanAndCovariance) {
  RngStream rng(17, 0);
  for (int p : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd mu(p);
      Eigen::MatrixXd a(p, p);
      for (int i = 0; i < p; ++i) {
        mu(i) = rng.normal(0.0, 3.0);
        for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
      }
      const Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);
      const auto ps = unscented_points(mu, cov);
      ASSERT_EQ(ps.count, static_cast<std::size_t>(2 * p));
      Eigen::VectorXd m = Eigen::VectorXd::Zero(p);
      for (int j = 0; j < 2 * p; ++j) m += ps.weights(j) * ps.points.col(j);
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
      for (int j = 0; j < 2 * p; ++j) {
        const Eigen::VectorXd d = ps.points.col(j) - m;
        c += ps.weights(j) * d * d.transpose();
      }
      EXPECT_LT((m - mu).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((c - cov).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Unscented, NonPositiveDefiniteRejected) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(unscented_points(Eigen::VectorXd::Zero(2), cov), SingularCovarianceError);
}
