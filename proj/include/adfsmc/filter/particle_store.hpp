#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <adfsmc/core/errors.hpp>
#include <adfsmc/core/model.hpp>

namespace adfsmc {

/// State storage for N particles of a Markov-order-D model.
///
/// One payload slab holds (D+1) * N states and is allocated at construction.
/// Each particle owns a row of D+1 state pointers used as a ring indexed by
/// t mod (D+1). At time t particle i writes into payload slot (t mod (D+1), i)
/// and points its own ring entry at it; the D older entries may point at
/// payloads written by ancestors. Resampling copies D pointers per particle
/// into a backup table and swaps tables, so payloads are never moved.
class StateStore {
 public:
  StateStore(std::size_t particles, std::size_t order, std::size_t dim)
      : n_(particles), order_(order), ring_(order + 1), dim_(dim),
        payload_(ring_ * particles * dim), rows_(ring_ * particles, nullptr),
        backup_(ring_ * particles, nullptr) {
    if (particles == 0) throw ConfigError("particle store needs N >= 1");
    if (order == 0) throw ConfigError("Markov order must be >= 1");
  }

  std::size_t size() const { return n_; }
  std::size_t order() const { return order_; }
  std::size_t dim() const { return dim_; }

  /// Write target for particle i's state at time t; also links it into the ring.
  std::span<double> emplace(std::size_t i, std::size_t t) {
    const std::size_t s = t % ring_;
    double* dst = payload_.data() + (s * n_ + i) * dim_;
    rows_[i * ring_ + s] = dst;
    return {dst, dim_};
  }

  std::span<const double> state(std::size_t i, std::size_t t) const {
    return {rows_[i * ring_ + t % ring_], dim_};
  }

  /// States t-len .. t-1 of particle i (len = min(t, D)), the conditioning
  /// window for a transition into time t.
  StateWindow window(std::size_t i, std::size_t t) const {
    const std::size_t len = t < order_ ? t : order_;
    if (len == 0) return StateWindow(rows_.data() + i * ring_, ring_, 0, 0, dim_);
    return StateWindow(rows_.data() + i * ring_, ring_, (t - len) % ring_, len, dim_);
  }

  /// After the states of time t are final: child k (placed at slot perm[k])
  /// inherits the last D ring entries of ancestor ancestors[k].
  void resample(std::span<const std::uint32_t> ancestors, std::span<const std::uint32_t> perm, std::size_t t) {
    for (std::size_t k = 0; k < n_; ++k) {
      const double* const* src = rows_.data() + static_cast<std::size_t>(ancestors[k]) * ring_;
      const double** dst = backup_.data() + static_cast<std::size_t>(perm[k]) * ring_;
      for (std::size_t j = 0; j < order_; ++j) {
        const std::size_t s = (t + ring_ - j) % ring_;
        dst[s] = src[s];
      }
    }
    index_copies_ += n_ * order_;
    rows_.swap(backup_);
  }

  std::uint64_t index_copies() const { return index_copies_; }

 private:
  std::size_t n_;
  std::size_t order_;
  std::size_t ring_;
  std::size_t dim_;
  std::vector<double> payload_;
  std::vector<const double*> rows_;
  std::vector<const double*> backup_;
  std::uint64_t index_copies_ = 0;
};

/// Double-buffered slab of N objects addressed through per-particle handles.
///
/// Particle i reads `current(i)`, the object its handle points at in the live
/// slab. New objects are built in the staging slab at any index u; `commit`
/// points child perm[k] at staging entry ancestors[k] and flips the slabs.
template <class T>
class HandleSlab {
 public:
  HandleSlab() = default;
  HandleSlab(std::size_t n, const T& proto) : slabs_{std::vector<T>(n, proto), std::vector<T>(n, proto)} {
    handles_.resize(n);
    next_.resize(n);
    for (std::size_t i = 0; i < n; ++i) handles_[i] = static_cast<std::uint32_t>(i);
  }

  std::size_t size() const { return handles_.size(); }

  const T& current(std::size_t i) const { return slabs_[live_][handles_[i]]; }
  T& live_slot(std::size_t u) { return slabs_[live_][u]; }
  T& staging(std::size_t u) { return slabs_[live_ ^ 1U][u]; }
  std::uint32_t handle(std::size_t i) const { return handles_[i]; }
  std::span<const std::uint32_t> handles() const { return handles_; }

  void commit(std::span<const std::uint32_t> ancestors, std::span<const std::uint32_t> perm) {
    for (std::size_t k = 0; k < ancestors.size(); ++k) next_[perm[k]] = ancestors[k];
    handles_.swap(next_);
    live_ ^= 1U;
  }

  /// Re-points handles at the ancestors without touching the slabs.
  void reindex(std::span<const std::uint32_t> ancestors, std::span<const std::uint32_t> perm) {
    for (std::size_t k = 0; k < ancestors.size(); ++k) next_[perm[k]] = handles_[ancestors[k]];
    handles_.swap(next_);
  }

  /// Staging entry i becomes particle i's object (no resampling involved).
  void commit_identity() {
    for (std::size_t i = 0; i < handles_.size(); ++i) handles_[i] = static_cast<std::uint32_t>(i);
    live_ ^= 1U;
  }

 private:
  std::vector<T> slabs_[2];
  std::vector<std::uint32_t> handles_;
  std::vector<std::uint32_t> next_;
  unsigned live_ = 0;
};

/// HandleSlab specialised to flat rows of `width` doubles (PF parameter particles).
class RowSlab {
 public:
  RowSlab() = default;
  RowSlab(std::size_t n, std::size_t width)
      : width_(width), slabs_{std::vector<double>(n * width), std::vector<double>(n * width)},
        handles_(n), next_(n) {
    for (std::size_t i = 0; i < n; ++i) handles_[i] = static_cast<std::uint32_t>(i);
  }

  std::size_t size() const { return handles_.size(); }
  std::size_t width() const { return width_; }

  std::span<const double> current(std::size_t i) const {
    return {slabs_[live_].data() + static_cast<std::size_t>(handles_[i]) * width_, width_};
  }
  std::span<double> live_slot(std::size_t u) { return {slabs_[live_].data() + u * width_, width_}; }
  std::span<double> staging(std::size_t u) { return {slabs_[live_ ^ 1U].data() + u * width_, width_}; }

  void reindex(std::span<const std::uint32_t> ancestors, std::span<const std::uint32_t> perm) {
    for (std::size_t k = 0; k < ancestors.size(); ++k) next_[perm[k]] = handles_[ancestors[k]];
    handles_.swap(next_);
  }

  void commit_identity() {
    for (std::size_t i = 0; i < handles_.size(); ++i) handles_[i] = static_cast<std::uint32_t>(i);
    live_ ^= 1U;
  }

 private:
  std::size_t width_ = 0;
  std::vector<double> slabs_[2];
  std::vector<std::uint32_t> handles_;
  std::vector<std::uint32_t> next_;
  unsigned live_ = 0;
};

}  // namespace adfsmc
