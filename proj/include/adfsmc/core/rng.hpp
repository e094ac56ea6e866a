#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace adfsmc {

/// Named random streams. Each algorithm phase draws from its own stream so
/// that turning a phase off (e.g. Liu-West with a = 1) leaves every other
/// phase's draws untouched.
enum class StreamId : std::uint64_t {
  kInit = 1,
  kParamDraw = 2,
  kPropagate = 3,
  kResample = 4,
  kUpdate = 5,
  kPerturb = 6,
  kProposal = 7,
  kAccept = 8,
  kSimulate = 9,
  kInnerFilter = 10,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A deterministic pseudo-random stream keyed by (seed, stream id).
/// Identical keys reproduce identical draw sequences.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  RngStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream), engine_(derive(seed, stream)) {}
  RngStream(std::uint64_t seed, StreamId stream)
      : RngStream(seed, static_cast<std::uint64_t>(stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Child stream, e.g. one per PMMH iteration or per sweep cell.
  RngStream fork(std::uint64_t salt) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(salt + 0x632be59bd9b4e019ULL)), stream_);
  }

  Engine& engine() { return engine_; }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  /// Uniform on (0, 1], safe for log().
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

  double exponential() { return -std::log(uniform_pos()); }

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  /// Draw from an unnormalised categorical given by nonnegative weights.
  std::size_t categorical(std::span<const double> weights, double total) {
    double u = uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] <= 0.0) continue;
      last_positive = k;
      if (u < weights[k]) return k;
      u -= weights[k];
    }
    return last_positive;
  }

 private:
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xd1b54a32d192ed03ULL));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace adfsmc
