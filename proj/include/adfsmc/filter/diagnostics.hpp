#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <adfsmc/core/math.hpp>
#include <adfsmc/filter/particle_store.hpp>
#include <adfsmc/filter/resample.hpp>
#include <adfsmc/filter/run_result.hpp>

namespace adfsmc::detail {

/// ESS, log-evidence increment log(mean w) and the weighted state mean at time t.
/// `scratch` holds N doubles.
inline void weight_diagnostics(std::span<const double> log_w, const StateStore& states, std::size_t t,
                               std::span<double> scratch, std::span<double> state_mean, StepRecord& rec) {
  const std::size_t n = log_w.size();
  rec.ess = ess(log_w);
  const double top = max_finite(log_w);
  if (top == kNegInf) {
    rec.log_evidence_increment = kNegInf;
    for (double& v : state_mean) v = std::nan("");
    return;
  }
  const double total = exp_normalize(log_w, scratch);
  rec.log_evidence_increment = top + std::log(total / static_cast<double>(n));
  for (double& v : state_mean) v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (scratch[i] == 0.0) continue;
    const auto x = states.state(i, t);
    const double w = scratch[i] / total;
    for (std::size_t j = 0; j < state_mean.size(); ++j) state_mean[j] += w * x[j];
  }
}

// NaN log-weights are treated as zero weight.
inline double sanitize(double log_w) { return std::isnan(log_w) ? kNegInf : log_w; }

}  // namespace adfsmc::detail
