#pragma once

#include <cstdint>
#include <limits>

namespace selfplay {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Mixes a seed with up to two stream coordinates into an independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ (a * 0xd1b54a32d192ed03ULL));
  h = detail::splitmix64(h ^ (b * 0x8cb92ba72f3d8dd7ULL));
  return h;
}

/// Counter-based random stream. The i-th draw is a pure function of
/// (seed, domain, i), so any position in an episode can be replayed exactly
/// and results do not depend on the standard library's distributions.
class RandomStream {
 public:
  RandomStream() = default;
  explicit RandomStream(std::uint64_t seed, std::uint64_t domain = 0) noexcept
      : key_(derive_seed(seed, domain, 0x5eed)) {}

  std::uint64_t next_u64() noexcept {
    return detail::splitmix64(key_ ^ detail::splitmix64(counter_++));
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t position() const noexcept { return counter_; }

  // UniformRandomBitGenerator surface, for std::shuffle and friends.
  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

 private:
  std::uint64_t key_ = derive_seed(0, 0, 0x5eed);
  std::uint64_t counter_ = 0;
};

}  // namespace selfplay
