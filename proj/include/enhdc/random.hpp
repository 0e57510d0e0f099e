#pragma once

// Deterministic random generation.
//
// Everything random in the toolkit is derived from SplitMix64 (Steele, Lea &
// Flood, 2014). A (seed, stream) pair selects a key; the n-th 64-bit word of
// that stream is mix64(key + (n + 1) * golden_gamma). Words are therefore
// addressable by counter, and two streams never share state.
//
// std::shuffle and the <random> distributions are implementation-defined, so
// shuffles and bounded draws are implemented here to keep outputs identical
// across standard libraries.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "enhdc/hypervector.hpp"

namespace enhdc {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key of stream `stream_id` under `seed`.
[[nodiscard]] constexpr std::uint64_t stream_key(Seed seed, std::uint64_t stream_id) noexcept {
  return mix64(seed.value ^ mix64(stream_id + kGoldenGamma));
}

// n-th word of a keyed stream.
[[nodiscard]] constexpr std::uint64_t stream_word(std::uint64_t key, std::uint64_t n) noexcept {
  return mix64(key + (n + 1) * kGoldenGamma);
}

// Child seed for the index-th member of a family (ensemble members, sweep
// repetitions).
[[nodiscard]] constexpr Seed derive_seed(Seed parent, std::uint64_t index) noexcept {
  return Seed{stream_key(parent, 0xD1B54A32D192ED03ULL ^ index)};
}

// Sequential SplitMix64 generator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(Seed seed, std::uint64_t stream_id = 0) noexcept
      : key_(stream_key(seed, stream_id)) {}

  result_type operator()() noexcept { return stream_word(key_, counter_++); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates shuffle driven by SplitMix64::below.
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) noexcept {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace enhdc
