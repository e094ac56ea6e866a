#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <adfsmc/approx/gaussian.hpp>

namespace adfsmc {

/// Components whose weight falls below this are dropped.
inline constexpr double kMixtureWeightFloor = 1e-12;

/// Mixture of Gaussians with a fixed component capacity L. Dropped
/// components keep their storage and carry weight exactly zero.
struct MixtureApprox {
  std::vector<double> weights;
  std::vector<GaussianApprox> components;

  MixtureApprox() = default;
  MixtureApprox(std::vector<double> w, std::vector<GaussianApprox> comps)
      : weights(std::move(w)), components(std::move(comps)) {
    if (weights.size() != components.size() || weights.empty()) {
      throw DimensionError("mixture needs one weight per component and at least one component");
    }
    double total = 0.0;
    for (double a : weights) {
      if (a < 0.0) throw DimensionError("mixture weights must be nonnegative");
      total += a;
    }
    if (!(total > 0.0)) throw DimensionError("mixture weights must not all be zero");
    for (double& a : weights) a /= total;
  }

  /// Means drawn from `draw_prior`, each with the prior covariance, equal weights.
  template <class PriorDraw>
  static MixtureApprox from_prior(const GaussianApprox& prior, std::size_t size, PriorDraw&& draw_prior) {
    std::vector<GaussianApprox> comps(size, prior);
    for (auto& c : comps) draw_prior(std::span<double>(c.mean.data(), prior.dim()));
    return MixtureApprox(std::vector<double>(size, 1.0), std::move(comps));
  }

  std::size_t capacity() const { return components.size(); }
  std::size_t dim() const { return components.front().dim(); }
  std::size_t active() const {
    std::size_t n = 0;
    for (double a : weights) n += a > 0.0 ? 1 : 0;
    return n;
  }

  /// Overall mean and covariance (law of total variance).
  void moments(Eigen::VectorXd& mean, Eigen::MatrixXd& cov) const {
    mean.setZero();
    for (std::size_t m = 0; m < capacity(); ++m) {
      if (weights[m] > 0.0) mean.noalias() += weights[m] * components[m].mean;
    }
    cov.setZero();
    for (std::size_t m = 0; m < capacity(); ++m) {
      if (weights[m] <= 0.0) continue;
      cov.noalias() += weights[m] * components[m].cov;
      cov.noalias() += weights[m] * (components[m].mean - mean) * (components[m].mean - mean).transpose();
    }
  }
};

inline void approx_sample(const MixtureApprox& q, RngStream& rng, std::span<double> out) {
  const std::size_t m = rng.categorical(q.weights, 1.0);
  approx_sample(q.components[m], rng, out);
}

struct MixtureWorkspace {
  MixtureWorkspace(std::size_t p, std::size_t capacity, MomentScheme scheme)
      : moments(p, scheme), log_weights(capacity) {}
  MomentWorkspace moments;
  std::vector<double> log_weights;
};

/// Assumed-density update of a Gaussian mixture.
///
/// Each component is moment-matched against t(theta) on its own; its
/// normaliser beta_m = E_{N_m}[t] reweights it, alpha_m <- alpha_m beta_m / sum.
/// A component whose own normaliser degenerates gets beta_m = 0. If every
/// component degenerates, `out` is set to `prev`.
template <class Likelihood>
UpdateStatus mixture_update(const MixtureApprox& prev, const Likelihood& lik, RngStream& rng,
                            MixtureWorkspace& ws, MixtureApprox& out) {
  const std::size_t cap = prev.capacity();
  for (std::size_t m = 0; m < cap; ++m) {
    ws.log_weights[m] = kNegInf;
    auto& target = out.components[m];
    if (prev.weights[m] <= 0.0) {
      target = prev.components[m];
      continue;
    }
    const auto& source = prev.components[m];
    const auto log_beta = ws.moments.match(source.mean, source.chol, lik, rng, target.mean, target.cov);
    if (!log_beta) {
      target = source;
      continue;
    }
    if (!detail::factorize(target.cov, target.chol, 1e-3 * source.cov.trace() / source.cov.rows())) {
      // Normaliser is usable but the matched covariance is not; keep the old shape.
      target = source;
    }
    ws.log_weights[m] = std::log(prev.weights[m]) + *log_beta;
  }

  const double top = max_finite(ws.log_weights);
  if (top == kNegInf) {
    out = prev;
    return UpdateStatus::degenerate;
  }
  double total = 0.0;
  for (std::size_t m = 0; m < cap; ++m) {
    out.weights[m] = std::exp(ws.log_weights[m] - top);
    total += out.weights[m];
  }
  double kept = 0.0;
  for (std::size_t m = 0; m < cap; ++m) {
    out.weights[m] /= total;
    if (out.weights[m] < kMixtureWeightFloor) out.weights[m] = 0.0;
    kept += out.weights[m];
  }
  for (std::size_t m = 0; m < cap; ++m) out.weights[m] /= kept;
  return UpdateStatus::ok;
}

template <class Likelihood>
MixtureApprox mixture_update(const MixtureApprox& prev, const Likelihood& lik, const MomentScheme& scheme,
                             RngStream& rng, UpdateStatus* status = nullptr) {
  MixtureWorkspace ws(prev.dim(), prev.capacity(), scheme);
  MixtureApprox out = prev;
  const UpdateStatus s = mixture_update(prev, lik, rng, ws, out);
  if (status) *status = s;
  return out;
}

}  // namespace adfsmc
