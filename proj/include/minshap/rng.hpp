#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace minshap {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

/// Counter-based deterministic random stream.
///
/// Every draw is a pure function of (key, counter). Child streams are derived
/// from the key alone, so `child("perm", 7)` is the same stream no matter
/// how many draws or other children were taken from the parent. This is what
/// makes permutation-level parallelism reproducible.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) : key_(seed) {}

  [[nodiscard]] RngStream child(std::string_view tag, std::uint64_t index = 0) const;

  [[nodiscard]] std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Multiply-shift with rejection of the biased low range; exactly uniform.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t floor = (0 - bound) % bound;
      while (low < floor) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }
  /// Standard normal draw (Box-Muller).
  double normal();

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace minshap
