#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <adfsmc/core/errors.hpp>

namespace adfsmc {

/// Estimate entries are floored at this value before renormalising.
inline constexpr double kKlFloor = 1e-12;

/// Sum over coordinates of KL(exact_i || estimate_i).
inline double kl_factorized(const std::vector<std::vector<double>>& estimate,
                            const std::vector<std::vector<double>>& exact) {
  if (estimate.size() != exact.size()) throw DimensionError("KL: table counts differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (estimate[i].size() != exact[i].size()) throw DimensionError("KL: table sizes differ");
    double z = 0.0;
    for (double e : estimate[i]) z += std::max(e, kKlFloor);
    for (std::size_t v = 0; v < exact[i].size(); ++v) {
      const double p = exact[i][v];
      if (p <= 0.0) continue;
      kl += p * (std::log(p) - std::log(std::max(estimate[i][v], kKlFloor) / z));
    }
  }
  return kl;
}

/// Mean squared error of scalar estimates against the truth.
inline double mse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw DimensionError("MSE of no estimates");
  double s = 0.0;
  for (double e : estimates) s += (e - truth) * (e - truth);
  return s / static_cast<double>(estimates.size());
}

/// Total-variation distance between two distributions on the same support.
inline double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("TV: sizes differ");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s;
}

}  // namespace adfsmc
