#pragma once

#include <cstdint>

namespace npqn {

/// SplitMix64 (Steele, Lea, Flood 2014). The stream is fully specified by the
/// 64-bit state, so any implementation reproduces it bit for bit:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Uniform doubles in [0, 1) take the top 53 bits: (next() >> 11) * 2^-53.
class SplitMix64 {
public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  constexpr std::uint64_t state() const noexcept { return state_; }

private:
  std::uint64_t state_;
};

/// Derives the seed of an independent substream: the first output of a
/// SplitMix64 seeded with master ^ (0x9E3779B97F4A7C15 * (tag + 1)).
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag) noexcept {
  SplitMix64 g(master ^ (0x9E3779B97F4A7C15ULL * (tag + 1)));
  return g.next();
}

/// Tags reserved for the streams used by the benchmark protocol.
namespace stream_tag {
inline constexpr std::uint64_t starts = 0x5354415254ULL;    // "START"
inline constexpr std::uint64_t nonsmooth = 0x4E534D54ULL;   // "NSMT"
} // namespace stream_tag

} // namespace npqn
