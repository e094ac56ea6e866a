#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <utility>

#include <adfsmc/core/alloc_hook.hpp>
#include <adfsmc/filter/run_result.hpp>

namespace adfsmc {

/// Wall-clock and heap-allocation bookkeeping for one timestep.
class StepMeter {
 public:
  explicit StepMeter(bool timing) : timing_(timing) {}

  void start() {
    allocations_ = instr::heap_allocations();
    if (timing_) begin_ = std::chrono::steady_clock::now();
  }

  void stop(StepRecord& rec) const {
    rec.allocations = instr::heap_allocations() - allocations_;
    rec.wall_ms = timing_ ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin_).count()
                          : 0.0;
  }

 private:
  bool timing_;
  std::uint64_t allocations_ = 0;
  std::chrono::steady_clock::time_point begin_{};
};

namespace detail {

// Uniform random permutation of perm in place (Fisher-Yates).
inline void shuffle(std::span<std::uint32_t> perm, RngStream& rng) {
  for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
}

inline void identity(std::span<std::uint32_t> perm) {
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<std::uint32_t>(k);
}

inline void check_observations(const Series& obs, const Dims& dims) {
  if (obs.empty()) throw ConfigError("observation sequence is empty");
  if (obs.dim() != dims.obs) throw DimensionError("observation dimension does not match the model");
}

}  // namespace detail

}  // namespace adfsmc
