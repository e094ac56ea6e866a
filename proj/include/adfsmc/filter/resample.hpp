#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/math.hpp>
#include <adfsmc/core/rng.hpp>

namespace adfsmc {

enum class ResampleScheme { multinomial, systematic };

inline ResampleScheme parse_resample_scheme(std::string_view name) {
  if (name == "multinomial") return ResampleScheme::multinomial;
  if (name == "systematic") return ResampleScheme::systematic;
  throw ConfigError("unknown resampling scheme '" + std::string(name) + "'");
}

/// Effective sample size (sum w)^2 / sum w^2 from log-weights.
inline double ess(std::span<const double> log_weights) {
  const double top = max_finite(log_weights);
  if (top == kNegInf) return 0.0;
  double s1 = 0.0, s2 = 0.0;
  for (double lw : log_weights) {
    const double w = std::exp(lw - top);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

namespace detail {

inline double normalize_or_throw(std::span<const double> log_weights, std::span<double> weights) {
  const double total = exp_normalize(log_weights, weights);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateWeightsError("all particle weights are zero (every log-weight is -inf)");
  }
  return total;
}

// Walks the weight CDF with sorted uniforms u_k = positions[k] * total.
inline void walk_cdf(std::span<const double> weights, std::span<const double> sorted_u,
                     std::span<std::uint32_t> ancestors) {
  const std::size_t n = weights.size();
  std::size_t src = 0;
  double cdf = weights[0];
  for (std::size_t k = 0; k < ancestors.size(); ++k) {
    while (sorted_u[k] >= cdf && src + 1 < n) cdf += weights[++src];
    // Never select a zero-weight particle through round-off at the tail.
    std::size_t pick = src;
    while (weights[pick] <= 0.0 && pick > 0) --pick;
    ancestors[k] = static_cast<std::uint32_t>(pick);
  }
}

}  // namespace detail

/// Scratch buffers so resampling inside the filter loop does not allocate.
/// `draws` defaults to the number of weights.
struct ResampleWorkspace {
  explicit ResampleWorkspace(std::size_t n, std::size_t draws = 0)
      : weights(n), positions((draws ? draws : n) + 1) {}
  std::vector<double> weights;
  std::vector<double> positions;
};

namespace detail {

inline void check_workspace(std::size_t n, std::size_t draws, const ResampleWorkspace& ws) {
  if (n == 0) throw DimensionError("resampling needs at least one weight");
  if (ws.weights.size() < n || ws.positions.size() < draws + 1) {
    throw DimensionError("resampling workspace is too small");
  }
}

}  // namespace detail

/// Multinomial resampling: N i.i.d. draws from the normalised weights.
///
/// Uses sorted uniforms from normalised exponential spacings, so the
/// ancestor indices come out in ascending order in O(N).
inline void multinomial_resample(std::span<const double> log_weights, RngStream& rng,
                                 std::span<std::uint32_t> ancestors, ResampleWorkspace& ws) {
  const std::size_t n = log_weights.size();
  const std::size_t m = ancestors.size();
  detail::check_workspace(n, m, ws);
  const double total = detail::normalize_or_throw(log_weights, std::span<double>(ws.weights.data(), n));
  double acc = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    acc += rng.exponential();
    ws.positions[k] = acc;
  }
  const double scale = total / acc;
  for (std::size_t k = 0; k < m; ++k) ws.positions[k] *= scale;
  detail::walk_cdf(std::span<const double>(ws.weights.data(), n), ws.positions, ancestors);
}

/// Systematic resampling: a single uniform offset, stratified positions.
inline void systematic_resample(std::span<const double> log_weights, RngStream& rng,
                                std::span<std::uint32_t> ancestors, ResampleWorkspace& ws) {
  const std::size_t n = log_weights.size();
  detail::check_workspace(n, ancestors.size(), ws);
  const double total = detail::normalize_or_throw(log_weights, std::span<double>(ws.weights.data(), n));
  const double step = total / static_cast<double>(ancestors.size());
  const double u0 = rng.uniform() * step;
  for (std::size_t k = 0; k < ancestors.size(); ++k) ws.positions[k] = u0 + step * static_cast<double>(k);
  detail::walk_cdf(std::span<const double>(ws.weights.data(), n), ws.positions, ancestors);
}

inline void resample(ResampleScheme scheme, std::span<const double> log_weights, RngStream& rng,
                     std::span<std::uint32_t> ancestors, ResampleWorkspace& ws) {
  if (scheme == ResampleScheme::systematic) {
    systematic_resample(log_weights, rng, ancestors, ws);
  } else {
    multinomial_resample(log_weights, rng, ancestors, ws);
  }
}

inline std::vector<std::uint32_t> multinomial_resample(std::span<const double> log_weights, RngStream& rng) {
  ResampleWorkspace ws(log_weights.size());
  std::vector<std::uint32_t> ancestors(log_weights.size());
  multinomial_resample(log_weights, rng, ancestors, ws);
  return ancestors;
}

/// Number of distinct values in a sorted ancestor vector.
inline std::size_t count_distinct(std::span<const std::uint32_t> sorted) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k == 0 || sorted[k] != sorted[k - 1]) ++n;
  }
  return n;
}

}  // namespace adfsmc
