#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include <adfsmc/approx/scheme.hpp>
#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/math.hpp>
#include <adfsmc/core/rng.hpp>

namespace adfsmc {

enum class UpdateStatus { ok, degenerate };

namespace detail {

/// Writes the lower Cholesky factor of (sym + eps I) into `factor`, with
/// eps = 0 unless the plain factorisation fails. Returns the eps used, or a
/// negative value if the matrix stays indefinite after the jitter schedule.
/// Allocation-free when `factor` already has the right shape.
inline double factorize_jittered(const Eigen::MatrixXd& sym, Eigen::MatrixXd& factor,
                                 double scale_hint = 0.0) {
  const auto p = sym.rows();
  factor = sym;
  {
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(factor);
    if (llt.info() == Eigen::Success) {
      factor.triangularView<Eigen::StrictlyUpper>().setZero();
      return 0.0;
    }
  }
  double scale = std::max(sym.trace() / static_cast<double>(p), scale_hint);
  if (!(scale > 0.0) || !std::isfinite(scale)) return -1.0;
  double eps = 1e-9 * scale;
  for (int attempt = 0; attempt < 8; ++attempt, eps *= 10.0) {
    factor = sym;
    factor.diagonal().array() += eps;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(factor);
    if (llt.info() == Eigen::Success) {
      factor.triangularView<Eigen::StrictlyUpper>().setZero();
      return eps;
    }
  }
  return -1.0;
}

/// Factorises cov in place of `factor`; any jitter needed is added to cov too.
inline bool factorize(Eigen::MatrixXd& cov, Eigen::MatrixXd& factor, double scale_hint = 0.0) {
  const double eps = factorize_jittered(cov, factor, scale_hint);
  if (eps < 0.0) return false;
  if (eps > 0.0) cov.diagonal().array() += eps;
  return true;
}

inline void symmetrize(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
}

/// out = mean + L z with z ~ N(0, I), in place, no temporaries.
inline void sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol, RngStream& rng,
                            std::span<double> out) {
  const auto p = mean.size();
  for (Eigen::Index i = 0; i < p; ++i) out[i] = rng.normal();
  for (Eigen::Index i = p - 1; i >= 0; --i) {
    double v = mean(i);
    for (Eigen::Index j = 0; j <= i; ++j) v += chol(i, j) * out[j];
    out[i] = v;
  }
}

}  // namespace detail

/// Gaussian approximation N(mean, cov), carrying the lower Cholesky factor
/// of cov so that sampling and sigma-point placement need no factorisation.
struct GaussianApprox {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;

  GaussianApprox() = default;
  GaussianApprox(Eigen::VectorXd m, Eigen::MatrixXd c) : mean(std::move(m)), cov(std::move(c)) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
      throw DimensionError("Gaussian mean/covariance dimensions disagree");
    }
    detail::symmetrize(cov);
    chol.resize(cov.rows(), cov.cols());
    if (!detail::factorize(cov, chol)) throw SingularCovarianceError("covariance is not positive definite");
  }

  static GaussianApprox scalar(double mean, double var) {
    return GaussianApprox(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var));
  }

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

inline void approx_sample(const GaussianApprox& q, RngStream& rng, std::span<double> out) {
  detail::sample_gaussian(q.mean, q.chol, rng, out);
}

/// Weighted evaluation points for one moment-matching pass.
struct PointSet {
  Eigen::MatrixXd points;   // p x capacity, one point per column
  Eigen::VectorXd weights;  // sums to one over the first `count` entries
  std::size_t count = 0;
};

/// Points mu +/- column j of sqrt(p) L (L L^T = cov), j = 1..p, each with
/// weight 1/(2p). Reproduces mean and covariance exactly.
inline void fill_unscented(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol, PointSet& out) {
  const auto p = mean.size();
  const double scale = std::sqrt(static_cast<double>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    out.points.col(j) = mean + scale * chol.col(j);
    out.points.col(p + j) = mean - scale * chol.col(j);
  }
  out.count = static_cast<std::size_t>(2 * p);
  out.weights.head(2 * p).setConstant(1.0 / static_cast<double>(2 * p));
}

/// Tensor-product Gauss-Hermite grid rotated by the Cholesky factor.
inline void fill_gauss_hermite(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol,
                               const GaussHermiteRule& rule, Eigen::VectorXd& z, PointSet& out) {
  const auto p = static_cast<std::size_t>(mean.size());
  const std::size_t m = rule.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < p; ++i) total *= m;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double w = 1.0;
    for (std::size_t d = 0; d < p; ++d) {
      const std::size_t digit = rem % m;
      rem /= m;
      z(static_cast<Eigen::Index>(d)) = rule.nodes[digit];
      w *= rule.weights[digit];
    }
    auto col = out.points.col(static_cast<Eigen::Index>(idx));
    col = mean;
    col.noalias() += chol.triangularView<Eigen::Lower>() * z;
    out.weights(static_cast<Eigen::Index>(idx)) = w;
  }
  out.count = total;
}

inline void fill_monte_carlo(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol, std::size_t m,
                             RngStream& rng, PointSet& out) {
  const auto p = mean.size();
  for (std::size_t j = 0; j < m; ++j) {
    detail::sample_gaussian(mean, chol, rng,
                            {out.points.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(p)});
  }
  out.count = m;
  out.weights.head(static_cast<Eigen::Index>(m)).setConstant(1.0 / static_cast<double>(m));
}

inline PointSet unscented_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const GaussianApprox q(mean, cov);
  PointSet out;
  out.points.resize(mean.size(), 2 * mean.size());
  out.weights.resize(2 * mean.size());
  fill_unscented(q.mean, q.chol, out);
  return out;
}

inline PointSet gauss_hermite_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::size_t m,
                                     std::size_t budget = kDefaultPointBudget) {
  const auto p = static_cast<std::size_t>(mean.size());
  const std::size_t count = MomentScheme::gauss_hermite(m).point_count(p, budget + 1);
  if (count > budget) {
    throw BudgetError("Gauss-Hermite grid of " + std::to_string(m) + "^" + std::to_string(p) +
                      " points exceeds the budget of " + std::to_string(budget));
  }
  const GaussianApprox q(mean, cov);
  const GaussHermiteRule rule(m);
  PointSet out;
  out.points.resize(mean.size(), static_cast<Eigen::Index>(count));
  out.weights.resize(static_cast<Eigen::Index>(count));
  Eigen::VectorXd z(mean.size());
  fill_gauss_hermite(q.mean, q.chol, rule, z, out);
  return out;
}

/// Scratch space for moment matching one p-dimensional Gaussian under a
/// fixed scheme. Sized once; reusing it across updates is allocation-free.
class MomentWorkspace {
 public:
  MomentWorkspace(std::size_t p, MomentScheme scheme, std::size_t budget = kDefaultPointBudget)
      : scheme_(scheme), p_(p) {
    scheme_.validate();
    if (scheme_.kind == MomentScheme::Kind::gauss_hermite) {
      const std::size_t count = scheme_.point_count(p, budget + 1);
      if (count > budget) throw BudgetError("Gauss-Hermite grid exceeds the point budget");
      rule_.emplace(scheme_.samples);
    }
    const auto n = static_cast<Eigen::Index>(scheme_.point_count(p));
    const auto pp = static_cast<Eigen::Index>(p);
    points_.points.resize(pp, n);
    points_.weights.resize(n);
    log_t_.resize(n);
    scaled_.resize(n);
    z_.resize(pp);
    diff_.resize(pp);
  }

  const MomentScheme& scheme() const { return scheme_; }
  std::size_t dim() const { return p_; }
  const PointSet& points() const { return points_; }

  void fill(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol, RngStream& rng) {
    switch (scheme_.kind) {
      case MomentScheme::Kind::unscented: fill_unscented(mean, chol, points_); break;
      case MomentScheme::Kind::gauss_hermite: fill_gauss_hermite(mean, chol, *rule_, z_, points_); break;
      case MomentScheme::Kind::monte_carlo: fill_monte_carlo(mean, chol, scheme_.samples, rng, points_); break;
    }
  }

  /// Moment-matches t(theta) N(theta; mean, chol chol^T).
  ///
  /// Returns the log normaliser log E_q[t(theta)] (estimated by the scheme)
  /// and writes the matched mean/covariance. Returns nullopt when the
  /// normaliser falls below the floor or is not finite.
  template <class Likelihood>
  std::optional<double> match(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol,
                              const Likelihood& lik, RngStream& rng, Eigen::VectorXd& out_mean,
                              Eigen::MatrixXd& out_cov) {
    fill(mean, chol, rng);
    const auto n = static_cast<Eigen::Index>(points_.count);
    for (Eigen::Index j = 0; j < n; ++j) {
      log_t_(j) = lik(std::span<const double>(points_.points.col(j).data(), p_));
    }
    double top = kNegInf;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isnan(log_t_(j))) return std::nullopt;
      top = std::max(top, log_t_(j));
    }
    if (!std::isfinite(top)) return std::nullopt;
    double z = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      scaled_(j) = points_.weights(j) * std::exp(log_t_(j) - top);
      z += scaled_(j);
    }
    const double log_norm = std::log(z) + top;
    if (!(log_norm >= kLogZFloor) || !std::isfinite(log_norm)) return std::nullopt;

    out_mean.setZero();
    for (Eigen::Index j = 0; j < n; ++j) out_mean.noalias() += (scaled_(j) / z) * points_.points.col(j);
    out_cov.setZero();
    for (Eigen::Index j = 0; j < n; ++j) {
      diff_ = points_.points.col(j) - out_mean;
      out_cov.noalias() += (scaled_(j) / z) * diff_ * diff_.transpose();
    }
    detail::symmetrize(out_cov);
    return log_norm;
  }

 private:
  MomentScheme scheme_;
  std::size_t p_;
  std::optional<GaussHermiteRule> rule_;
  PointSet points_;
  Eigen::VectorXd log_t_;
  Eigen::VectorXd scaled_;
  Eigen::VectorXd z_;
  Eigen::VectorXd diff_;
};

/// Assumed-density update of a Gaussian: moment-match t(theta) q_prev(theta).
///
/// On a degenerate normaliser or an unrecoverable covariance, `out` is set to
/// `prev` and UpdateStatus::degenerate is returned. `out` must not alias `prev`.
template <class Likelihood>
UpdateStatus gaussian_update(const GaussianApprox& prev, const Likelihood& lik, RngStream& rng,
                             MomentWorkspace& ws, GaussianApprox& out) {
  const auto log_norm = ws.match(prev.mean, prev.chol, lik, rng, out.mean, out.cov);
  if (log_norm && detail::factorize(out.cov, out.chol, 1e-3 * prev.cov.trace() / prev.cov.rows())) {
    return UpdateStatus::ok;
  }
  out = prev;
  return UpdateStatus::degenerate;
}

template <class Likelihood>
GaussianApprox gaussian_update(const GaussianApprox& prev, const Likelihood& lik, const MomentScheme& scheme,
                               RngStream& rng, UpdateStatus* status = nullptr) {
  MomentWorkspace ws(prev.dim(), scheme);
  GaussianApprox out = prev;
  const UpdateStatus s = gaussian_update(prev, lik, rng, ws, out);
  if (status) *status = s;
  return out;
}

}  // namespace adfsmc
