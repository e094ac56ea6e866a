#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace adfsmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Normalisers below exp(-700) are treated as zero.
inline constexpr double kLogZFloor = -700.0;

inline double normal_logpdf(double x, double mean, double sd) {
  if (sd <= 0.0) return x == mean ? std::numeric_limits<double>::infinity() : kNegInf;
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double max_finite(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  return m;
}

inline double log_sum_exp(std::span<const double> values) {
  const double m = max_finite(values);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

/// Writes exp(log_w - max) into out and returns the sum.
inline double exp_normalize(std::span<const double> log_w, std::span<double> out) {
  const double m = max_finite(log_w);
  double total = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    out[i] = m == kNegInf ? 0.0 : std::exp(log_w[i] - m);
    total += out[i];
  }
  return total;
}

}  // namespace adfsmc
