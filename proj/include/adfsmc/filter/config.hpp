#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <adfsmc/approx/param_approx.hpp>
#include <adfsmc/filter/resample.hpp>

namespace adfsmc {

/// When the ADF update runs relative to resampling.
///
/// resample_first: resample, then update once per distinct surviving ancestor.
/// update_first: update every particle, then resample (the literal loop order).
enum class UpdateOrder { resample_first, update_first };

inline UpdateOrder parse_update_order(std::string_view name) {
  if (name == "resample_first") return UpdateOrder::resample_first;
  if (name == "update_first") return UpdateOrder::update_first;
  throw ConfigError("unknown update order '" + std::string(name) + "'");
}

inline const char* to_string(UpdateOrder o) {
  return o == UpdateOrder::resample_first ? "resample_first" : "update_first";
}

struct FilterConfig {
  std::size_t particles = 1000;
  ApproxOptions approx;
  ResampleScheme resample = ResampleScheme::multinomial;
  UpdateOrder order = UpdateOrder::resample_first;
  std::uint64_t seed = 1;
  double shrinkage = 0.98;  // Liu-West a
  bool record_timing = true;
  // Nonzero: shuffle particle slots after every resampling with this seed.
  std::uint64_t permute_seed = 0;

  void validate() const {
    if (particles < 1) throw ConfigError("N must be >= 1");
    if (particles > 0xffffffffULL) throw ConfigError("N exceeds the index width");
    approx.scheme.validate();
    if (approx.mixture_size < 1) throw ConfigError("mixture size must be >= 1");
    if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw ConfigError("shrinkage a must lie in (0, 1]");
  }
};

}  // namespace adfsmc
