#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace lrf {

/// All randomness in the toolkit flows from one 64-bit seed through
/// mt19937_64. The raw generator is bit-portable (its algorithm is fixed by
/// the standard); the std distributions are not, so every mapping from raw
/// 64-bit draws to values is done by hand below.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from (seed, stream). splitmix64
/// finalizer.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n >= 1. Multiply-shift (Lemire) with rejection,
/// exact and deterministic.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  while (true) {
    const std::uint64_t x = rng();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    const std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo >= n || lo >= (0ull - n) % n) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

/// Standard normal via Box-Muller. Two raw draws per value, no cached spare,
/// so the draw count per call is fixed.
inline double normal_unit(Rng& rng) {
  // (v + 0.5) * 2^-53 lies strictly inside (0, 1): log() stays finite.
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Fisher-Yates on top of uniform_below.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const std::uint64_t j = uniform_below(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace lrf
