#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace qkm {

// splitmix64 finalizer; derives decorrelated stream seeds from a base seed
// plus a small tag so nearby base seeds do not produce overlapping streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Tags for the independent random streams inside one experiment repeat.
namespace stream {
constexpr std::uint64_t coreset = 1;
constexpr std::uint64_t solver = 2;
constexpr std::uint64_t shots = 3;
constexpr std::uint64_t ground_truth = 4;
}  // namespace stream

using Rng = std::mt19937_64;

// All sampling below is hand-rolled on top of the engine's raw 64-bit output;
// std::*_distribution is implementation-defined and would break bit-level
// reproducibility across standard libraries.

// Uniform double in [0, 1).
inline double uniform01(Rng& rng) { return (rng() >> 11) * 0x1.0p-53; }

// Uniform double in (0, 1]; safe as a log argument.
inline double uniform01_open(Rng& rng) {
  return ((rng() >> 11) + 1) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Standard normal via Box-Muller (cosine branch only).
inline double normal01(Rng& rng) {
  double u1 = uniform01_open(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  std::size_t i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

// Draw one index from an unnormalized non-negative weight vector.
// Falls back to the last positive entry on floating-point shortfall.
inline std::size_t sample_discrete(Rng& rng, const std::vector<double>& weights,
                                   double total) {
  double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace qkm
