#pragma once

#include <span>
#include <vector>

#include <adfsmc/approx/param_approx.hpp>
#include <adfsmc/filter/run_result.hpp>

namespace adfsmc {

/// Weighted accumulator for the fused parameter posterior.
///
/// Continuous: moments of the weighted mixture of per-particle densities
/// (law of total variance). Discrete: weighted average of marginal tables.
/// Sized once; add/finish never allocate.
class ParamSummary {
 public:
  ParamSummary() = default;
  ParamSummary(ParamKind kind, std::size_t dim, std::vector<int> cardinalities = {})
      : kind_(kind), p_(dim), cards_(std::move(cardinalities)) {
    if (kind_ == ParamKind::discrete) {
      std::size_t total = 0;
      offsets_.push_back(0);
      for (int c : cards_) offsets_.push_back(total += static_cast<std::size_t>(c));
      tables_.assign(total, 0.0);
    } else {
      m1_.assign(p_, 0.0);
      m2_.assign(p_ * p_, 0.0);
    }
  }

  static ParamSummary for_space(const ParamSpace& space) {
    return ParamSummary(space.kind, space.dim, space.cardinalities);
  }

  ParamKind kind() const { return kind_; }
  std::size_t dim() const { return p_; }
  std::size_t table_size() const { return tables_.size(); }

  void reset() {
    weight_ = 0.0;
    std::fill(m1_.begin(), m1_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
    std::fill(tables_.begin(), tables_.end(), 0.0);
  }

  void add(const GaussianApprox& q, double w) {
    weight_ += w;
    for (std::size_t i = 0; i < p_; ++i) {
      const double mi = q.mean(static_cast<Eigen::Index>(i));
      m1_[i] += w * mi;
      for (std::size_t j = 0; j < p_; ++j) {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        m2_[i * p_ + j] += w * (q.cov(a, b) + mi * q.mean(b));
      }
    }
  }

  void add(const MixtureApprox& q, double w) {
    for (std::size_t m = 0; m < q.capacity(); ++m) {
      if (q.weights[m] > 0.0) add(q.components[m], w * q.weights[m]);
    }
  }

  void add(const FactorizedDiscreteApprox& q, double w) {
    weight_ += w;
    for (std::size_t k = 0; k < tables_.size(); ++k) tables_[k] += w * q.probs[k];
  }

  void add(const ParamApprox& q, double w) {
    std::visit([&](const auto& a) { add(a, w); }, q);
  }

  /// A point mass at theta (plain particle parameters).
  void add_point(std::span<const double> theta, double w) {
    weight_ += w;
    if (kind_ == ParamKind::discrete) {
      for (std::size_t i = 0; i < cards_.size(); ++i) tables_[offsets_[i] + static_cast<std::size_t>(theta[i])] += w;
      return;
    }
    for (std::size_t i = 0; i < p_; ++i) {
      m1_[i] += w * theta[i];
      for (std::size_t j = 0; j < p_; ++j) m2_[i * p_ + j] += w * theta[i] * theta[j];
    }
  }

  double total_weight() const { return weight_; }

  void finish_continuous(std::span<double> mean, std::span<double> cov) const {
    for (std::size_t i = 0; i < p_; ++i) mean[i] = m1_[i] / weight_;
    for (std::size_t i = 0; i < p_; ++i) {
      for (std::size_t j = 0; j < p_; ++j) cov[i * p_ + j] = m2_[i * p_ + j] / weight_ - mean[i] * mean[j];
    }
  }

  void finish_discrete(std::span<double> tables) const {
    for (std::size_t k = 0; k < tables_.size(); ++k) tables[k] = tables_[k] / weight_;
  }

 private:
  ParamKind kind_ = ParamKind::continuous;
  std::size_t p_ = 0;
  std::vector<int> cards_;
  std::vector<std::size_t> offsets_;
  double weight_ = 0.0;
  std::vector<double> m1_;
  std::vector<double> m2_;
  std::vector<double> tables_;
};

struct FusedPosterior {
  ParamKind kind = ParamKind::continuous;
  std::vector<double> mean;
  std::vector<double> cov;        // row-major
  std::vector<double> marginals;  // concatenated tables
};

/// Equal-weight fusion of per-particle approximations.
inline FusedPosterior fuse_param_posterior(std::span<const ParamApprox> particles) {
  if (particles.empty()) throw DimensionError("cannot fuse an empty particle set");
  FusedPosterior out;
  const auto& first = particles.front();
  if (const auto* d = std::get_if<FactorizedDiscreteApprox>(&first)) {
    ParamSummary acc(ParamKind::discrete, d->dim(), d->cardinalities);
    for (const auto& q : particles) acc.add(q, 1.0);
    out.kind = ParamKind::discrete;
    out.marginals.resize(acc.table_size());
    acc.finish_discrete(out.marginals);
    return out;
  }
  const std::size_t p = std::visit([](const auto& a) { return a.dim(); }, first);
  ParamSummary acc(ParamKind::continuous, p);
  for (const auto& q : particles) acc.add(q, 1.0);
  out.mean.resize(p);
  out.cov.resize(p * p);
  acc.finish_continuous(out.mean, out.cov);
  return out;
}

namespace detail {

inline void append_components(const GaussianApprox& q, double w, std::vector<MixtureComponent>& out) {
  out.push_back({w, std::vector<double>(q.mean.data(), q.mean.data() + q.mean.size()),
                 std::vector<double>(q.cov.data(), q.cov.data() + q.cov.size())});
}

inline void append_components(const MixtureApprox& q, double w, std::vector<MixtureComponent>& out) {
  for (std::size_t m = 0; m < q.capacity(); ++m) {
    if (q.weights[m] > 0.0) append_components(q.components[m], w * q.weights[m], out);
  }
}

inline void append_components(const FactorizedDiscreteApprox&, double, std::vector<MixtureComponent>&) {}

}  // namespace detail

}  // namespace adfsmc
