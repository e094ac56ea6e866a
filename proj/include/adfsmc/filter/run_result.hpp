#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <adfsmc/core/model.hpp>

namespace adfsmc {

struct StepRecord {
  std::size_t t = 0;
  double ess = 0.0;
  double log_evidence_increment = 0.0;
  double wall_ms = 0.0;
  std::uint64_t allocations = 0;
  std::size_t distinct = 0;    // distinct resampling ancestors
  std::size_t updates = 0;     // ADF updates performed
  std::size_t degenerate = 0;  // updates that kept the previous approximation
};

/// One weighted Gaussian (or point mass, cov = 0) in the fused parameter posterior.
struct MixtureComponent {
  double weight = 0.0;
  std::vector<double> mean;
  std::vector<double> cov;  // row-major
};

struct RunResult {
  std::string algorithm;
  ParamKind kind = ParamKind::continuous;
  std::size_t param_dim = 0;
  std::vector<int> cardinalities;

  std::vector<StepRecord> steps;
  Series state_mean;       // weighted filtering mean of x_t, before resampling
  Series param_mean;       // continuous: fused posterior mean per step
  Series param_cov;        // continuous: fused posterior covariance per step, row-major
  Series param_marginals;  // discrete: concatenated averaged marginal tables per step

  std::vector<MixtureComponent> final_components;
  double log_evidence = 0.0;
  std::uint64_t index_copies = 0;

  std::size_t num_steps() const { return steps.size(); }

  std::vector<double> final_param_mean() const {
    if (kind == ParamKind::discrete) {
      // Posterior mean code per coordinate.
      std::vector<double> out(cardinalities.size(), 0.0);
      const auto row = param_marginals[param_marginals.size() - 1];
      std::size_t off = 0;
      for (std::size_t i = 0; i < cardinalities.size(); ++i) {
        for (int v = 0; v < cardinalities[i]; ++v) out[i] += v * row[off + static_cast<std::size_t>(v)];
        off += static_cast<std::size_t>(cardinalities[i]);
      }
      return out;
    }
    if (param_mean.empty()) return {};
    const auto row = param_mean[param_mean.size() - 1];
    return {row.begin(), row.end()};
  }

  /// Final per-coordinate marginal tables (discrete runs).
  std::vector<std::vector<double>> final_marginals() const {
    std::vector<std::vector<double>> out;
    if (param_marginals.empty()) return out;
    const auto row = param_marginals[param_marginals.size() - 1];
    std::size_t off = 0;
    for (int c : cardinalities) {
      out.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(off),
                       row.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(c)));
      off += static_cast<std::size_t>(c);
    }
    return out;
  }

  /// Total weight of fused components whose mean lies within `radius` of `centre` (coordinate 0).
  double weight_near(double centre, double radius) const {
    double total = 0.0;
    for (const auto& c : final_components) {
      if (std::abs(c.mean.at(0) - centre) <= radius) total += c.weight;
    }
    return total;
  }

  std::uint64_t steady_state_allocations(std::size_t warmup = 2) const {
    std::uint64_t total = 0;
    for (std::size_t k = warmup; k < steps.size(); ++k) total += steps[k].allocations;
    return total;
  }

  double total_wall_ms() const {
    double total = 0.0;
    for (const auto& s : steps) total += s.wall_ms;
    return total;
  }
};

}  // namespace adfsmc
