#pragma once

#include "dwos/core/types.hpp"

#include <cstdint>

namespace dwos {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream.
///
/// A stream is identified by a 64-bit key derived from (seed, stream ids); draw i is a pure function
/// of (key, i). Walks can therefore be evaluated in any order, on any thread, and reproduce the same
/// numbers. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng() = default;
  constexpr explicit CounterRng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0)
      : key_(mix(mix(detail::splitmix64(seed), a), b)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() { return detail::splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  // Uniform in (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  // Independent child stream; the parent's position is not advanced.
  constexpr CounterRng child(std::uint64_t tag) const {
    CounterRng c;
    c.key_ = mix(key_, tag ^ 0x5851f42d4c957f2dULL);
    return c;
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t draws() const { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t k, std::uint64_t v) {
    return detail::splitmix64(k ^ detail::splitmix64(v + 0x2545f4914f6cdd1dULL));
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Stream purposes, used as the first stream id so different consumers never share draws.
enum class StreamTag : std::uint64_t {
  kWalk = 1,
  kInteriorSample = 2,
  kBoundarySample = 3,
  kRegularizer = 4,
  kOptimizer = 5,
  kHarness = 6,
};

inline CounterRng make_rng(std::uint64_t seed, StreamTag tag, std::uint64_t index, std::uint64_t sub = 0) {
  return CounterRng(seed, static_cast<std::uint64_t>(tag) * 0x100000000ULL + sub, index);
}

}  // namespace dwos
