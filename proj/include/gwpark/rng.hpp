#pragma once

#include <cstdint>
#include <random>

namespace gwpark {

/// SplitMix64 finalizer. Used only to derive stream keys, never as a generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Key of substream `index` under `seed`. Counter-based: the key depends only on
/// (seed, index), so replicate i sees the same stream whatever the worker count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// A deterministic random stream. Owned by one worker at a time.
///
/// Uniform variates are built from raw engine bits rather than
/// std::uniform_real_distribution so that draws are identical across standard
/// library implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) : engine_(key) {}

  /// Substream `index` of master seed `seed`.
  static RngStream substream(std::uint64_t seed, std::uint64_t index) {
    return RngStream(derive_seed(seed, index));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gwpark
