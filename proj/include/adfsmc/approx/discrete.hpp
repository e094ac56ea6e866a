#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <adfsmc/approx/gaussian.hpp>
#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/math.hpp>
#include <adfsmc/core/rng.hpp>

namespace adfsmc {

/// Fully factorised distribution over p discrete coordinates,
/// q(theta) = prod_i q_i(theta_i), stored as concatenated probability tables.
struct FactorizedDiscreteApprox {
  std::vector<int> cardinalities;
  std::vector<std::size_t> offsets;
  std::vector<double> probs;

  FactorizedDiscreteApprox() = default;
  explicit FactorizedDiscreteApprox(std::vector<int> cards) : cardinalities(std::move(cards)) {
    if (cardinalities.empty()) throw DimensionError("discrete approximation needs p >= 1");
    offsets.resize(cardinalities.size() + 1, 0);
    for (std::size_t i = 0; i < cardinalities.size(); ++i) {
      if (cardinalities[i] < 1) throw DimensionError("cardinality must be >= 1");
      offsets[i + 1] = offsets[i] + static_cast<std::size_t>(cardinalities[i]);
    }
    probs.resize(offsets.back());
    for (std::size_t i = 0; i < cardinalities.size(); ++i) {
      auto t = table(i);
      std::fill(t.begin(), t.end(), 1.0 / cardinalities[i]);
    }
  }

  FactorizedDiscreteApprox(std::vector<int> cards, const std::vector<std::vector<double>>& tables)
      : FactorizedDiscreteApprox(std::move(cards)) {
    if (tables.size() != cardinalities.size()) throw DimensionError("one table per coordinate expected");
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (tables[i].size() != static_cast<std::size_t>(cardinalities[i])) {
        throw DimensionError("table size does not match cardinality");
      }
      const double total = std::accumulate(tables[i].begin(), tables[i].end(), 0.0);
      if (!(total > 0.0)) throw DimensionError("table must have positive mass");
      for (std::size_t v = 0; v < tables[i].size(); ++v) {
        if (tables[i][v] < 0.0) throw DimensionError("probabilities must be nonnegative");
        table(i)[v] = tables[i][v] / total;
      }
    }
  }

  std::size_t dim() const { return cardinalities.size(); }
  std::span<double> table(std::size_t i) { return {probs.data() + offsets[i], offsets[i + 1] - offsets[i]}; }
  std::span<const double> table(std::size_t i) const {
    return {probs.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }

  std::size_t joint_cardinality(std::size_t cap) const {
    std::size_t n = 1;
    for (int c : cardinalities) {
      if (n > cap / static_cast<std::size_t>(c)) return cap;
      n *= static_cast<std::size_t>(c);
    }
    return n;
  }

  double log_prob(std::span<const double> theta) const {
    double lp = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) lp += std::log(table(i)[static_cast<std::size_t>(theta[i])]);
    return lp;
  }
};

inline void approx_sample(const FactorizedDiscreteApprox& q, RngStream& rng, std::span<double> out) {
  for (std::size_t i = 0; i < q.dim(); ++i) out[i] = static_cast<double>(rng.categorical(q.table(i), 1.0));
}

/// Scratch space for discrete_update with a fixed M.
///
/// When the joint cardinality is at most M the update enumerates every joint
/// configuration (exhaustive mode, exact projection); otherwise it draws M
/// joint samples from the previous approximation.
class DiscreteWorkspace {
 public:
  DiscreteWorkspace(const std::vector<int>& cardinalities, std::size_t samples)
      : samples_(samples), p_(cardinalities.size()) {
    if (samples_ < 1) throw ConfigError("discrete update needs M >= 1");
    std::size_t joint = 1;
    exhaustive_ = true;
    for (int c : cardinalities) {
      if (joint > samples_ / static_cast<std::size_t>(c)) {
        exhaustive_ = false;
        break;
      }
      joint *= static_cast<std::size_t>(c);
    }
    rows_ = exhaustive_ ? joint : samples_;
    codes_.resize(rows_ * p_);
    log_w_.resize(rows_);
    w_.resize(rows_);
    prefix_.resize(p_ + 1);
    std::size_t total = 0;
    for (int c : cardinalities) {
      offsets_.push_back(total);
      total += static_cast<std::size_t>(c);
    }
    partial_.resize(total);
  }

  bool exhaustive() const { return exhaustive_; }
  std::size_t samples() const { return samples_; }

  template <class Likelihood>
  UpdateStatus update(const FactorizedDiscreteApprox& prev, const Likelihood& lik, RngStream& rng,
                      FactorizedDiscreteApprox& out) {
    if (exhaustive_) {
      enumerate(prev);
    } else {
      for (std::size_t j = 0; j < rows_; ++j) approx_sample(prev, rng, row(j));
    }
    for (std::size_t j = 0; j < rows_; ++j) {
      log_w_[j] = lik(std::span<const double>(row(j)));
      if (std::isnan(log_w_[j])) log_w_[j] = kNegInf;
    }
    const double top = max_finite(log_w_);
    if (!std::isfinite(top)) {
      out = prev;
      return UpdateStatus::degenerate;
    }
    for (std::size_t j = 0; j < rows_; ++j) w_[j] = std::exp(log_w_[j] - top);
    return exhaustive_ ? finish_exhaustive(prev, top, out) : finish_sampled(prev, top, out);
  }

 private:
  std::span<double> row(std::size_t j) { return {codes_.data() + j * p_, p_}; }

  // Samples came from q_prev, so q_{i}(v) is proportional to the summed t-weights.
  UpdateStatus finish_sampled(const FactorizedDiscreteApprox& prev, double top, FactorizedDiscreteApprox& out) {
    double z = 0.0;
    for (std::size_t j = 0; j < rows_; ++j) z += w_[j];
    if (!(std::log(z / static_cast<double>(rows_)) + top >= kLogZFloor)) {
      out = prev;
      return UpdateStatus::degenerate;
    }
    std::fill(out.probs.begin(), out.probs.end(), 0.0);
    for (std::size_t j = 0; j < rows_; ++j) {
      const auto theta = row(j);
      for (std::size_t i = 0; i < p_; ++i) out.table(i)[static_cast<std::size_t>(theta[i])] += w_[j];
    }
    for (double& v : out.probs) v /= z;
    return UpdateStatus::ok;
  }

  // q_i(v) is factored out of its own marginal: new q_i(v) ~ q_i(v) S_i(v) with
  // S_i(v) = sum over the other coordinates of t times their probabilities.
  // Every S_i(v) runs over the other coordinates in the same order, so a
  // constant t leaves the tables bit-for-bit unchanged.
  UpdateStatus finish_exhaustive(const FactorizedDiscreteApprox& prev, double top, FactorizedDiscreteApprox& out) {
    std::fill(partial_.begin(), partial_.end(), 0.0);
    for (std::size_t j = 0; j < rows_; ++j) {
      if (w_[j] == 0.0) continue;
      const auto theta = row(j);
      prefix_[0] = 1.0;
      for (std::size_t i = 0; i < p_; ++i) prefix_[i + 1] = prefix_[i] * prev.table(i)[static_cast<std::size_t>(theta[i])];
      double suffix = 1.0;
      for (std::size_t i = p_; i-- > 0;) {
        const auto v = static_cast<std::size_t>(theta[i]);
        partial_[offsets_[i] + v] += w_[j] * (prefix_[i] * suffix);
        suffix *= prev.table(i)[v];
      }
    }
    double z = 0.0;
    for (std::size_t v = 0; v < prev.table(0).size(); ++v) z += prev.table(0)[v] * partial_[v];
    if (!(z > 0.0) || !(std::log(z) + top >= kLogZFloor)) {
      out = prev;
      return UpdateStatus::degenerate;
    }
    for (std::size_t i = 0; i < p_; ++i) {
      const auto q = prev.table(i);
      const auto dst = out.table(i);
      const std::span<const double> s(partial_.data() + offsets_[i], q.size());
      const double ref = *std::max_element(s.begin(), s.end());
      double total = 0.0;
      for (std::size_t v = 0; v < q.size(); ++v) total += (dst[v] = q[v] * (s[v] / ref));
      for (std::size_t v = 0; v < q.size(); ++v) dst[v] /= total;
    }
    return UpdateStatus::ok;
  }

  void enumerate(const FactorizedDiscreteApprox& prev) {
    for (std::size_t j = 0; j < rows_; ++j) {
      std::size_t rem = j;
      auto r = row(j);
      for (std::size_t i = 0; i < p_; ++i) {
        const auto c = static_cast<std::size_t>(prev.cardinalities[i]);
        r[i] = static_cast<double>(rem % c);
        rem /= c;
      }
    }
  }

  std::size_t samples_;
  std::size_t p_;
  bool exhaustive_ = false;
  std::size_t rows_ = 0;
  std::vector<double> codes_;
  std::vector<double> log_w_;
  std::vector<double> w_;
  std::vector<double> prefix_;
  std::vector<std::size_t> offsets_;
  std::vector<double> partial_;
};

template <class Likelihood>
FactorizedDiscreteApprox discrete_update(const FactorizedDiscreteApprox& prev, const Likelihood& lik,
                                         std::size_t samples, RngStream& rng, UpdateStatus* status = nullptr) {
  DiscreteWorkspace ws(prev.cardinalities, samples);
  FactorizedDiscreteApprox out = prev;
  const UpdateStatus s = ws.update(prev, lik, rng, out);
  if (status) *status = s;
  return out;
}

}  // namespace adfsmc
