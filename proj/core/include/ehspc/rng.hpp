#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ehspc {

/// SplitMix64 finalizer. Bijective on 64-bit words, so distinct keys never
/// collide before the output is truncated.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream addressed by a seed and a hierarchical path.
///
/// A stream is a (key, counter) pair: the key is folded from the seed and
/// every path index, the counter advances with each draw. Output word i is
/// mix64(key + i * golden), so the value at a given (seed, path, i) does not
/// depend on which thread produced it or on what was drawn elsewhere.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : key_(mix64(seed ^ kSeedSalt)) {}

  /// Sub-stream for path index `index` below this one. Does not consume.
  RngStream child(std::uint64_t index) const noexcept {
    RngStream s;
    s.key_ = mix64(key_ ^ mix64(index + kChildSalt));
    s.depth_ = depth_ + 1;
    return s;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }
  int depth() const noexcept { return depth_; }

  std::uint64_t operator()() noexcept {
    return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform double on the open interval (0, 1); 53 bits, never 0 or 1.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform double on [0, 1).
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Unbiased uniform integer on the inclusive range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>((*this)());
    const std::uint64_t limit = max() - (max() % span);
    std::uint64_t word;
    do {
      word = (*this)();
    } while (word >= limit);
    return lo + static_cast<std::int64_t>(word % span);
  }

  /// Unit-mean exponential variate, strictly positive.
  double exponential() noexcept { return -std::log(uniform_open()); }

 private:
  static constexpr std::uint64_t kSeedSalt = 0x5eed5eed5eed5eedULL;
  static constexpr std::uint64_t kChildSalt = 0xc4ceb9fe1a85ec53ULL;

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  int depth_ = 0;
};

}  // namespace ehspc
