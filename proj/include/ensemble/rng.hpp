#pragma once

// SplitMix64: a seedable, splittable 64-bit generator (Steele, Lea, Flood 2014).
// Splitting draws a child seed from the parent, so component streams of a
// product get independent generators from one user seed.

#include <cstdint>
#include <vector>

namespace ensemble {

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) from the top 53 bits.
  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  constexpr SplitMix64 split() noexcept { return SplitMix64(next() ^ 0x6a09e667f3bcc909ULL); }

  [[nodiscard]] constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// k child seeds derived from one seed.
inline std::vector<std::uint64_t> split_seeds(std::uint64_t seed, std::size_t k) {
  SplitMix64 root(seed);
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(root.split().next());
  return out;
}

}  // namespace ensemble
