#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace hgr {

// Counter-based randomness: every draw is a pure function of (seed, counters),
// so results do not depend on evaluation order or thread count.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t a) {
  return splitmix64(seed ^ splitmix64(a));
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                     std::uint64_t c = 0) {
  return hash_combine(hash_combine(hash_combine(splitmix64(seed), a), b), c);
}

/// Maps the top 53 bits of a hash to [0, 1).
constexpr double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Standard normal deviate from two independent hashes (Box-Muller).
inline double to_normal(std::uint64_t h1, std::uint64_t h2) {
  const double u1 = 1.0 - to_unit(h1);  // (0, 1]
  const double u2 = to_unit(h2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hgr
