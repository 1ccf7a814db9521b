#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "causal/error.hpp"

// Deterministic, portable randomness. std::mt19937_64 output is pinned by the
// standard, but std:: distributions are not, so all draws go through the
// helpers below and reproduce bit-for-bit across platforms.

namespace causal {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/** Uniform double in [0, 1) using the top 53 bits of one generator step. */
inline double uniform01(Rng& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/** Uniform integer in [0, n). */
inline std::size_t uniform_below(Rng& g, std::size_t n) {
  std::size_t i = static_cast<std::size_t>(uniform01(g) * static_cast<double>(n));
  return i >= n ? n - 1 : i;
}

/** Index drawn from an (unnormalized is not allowed) probability vector by CDF walk. */
inline int draw_categorical(Rng& g, const std::vector<double>& probs) {
  double u = uniform01(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // guards rounding runoff
}

/** Standard normal via Box-Muller; consumes exactly two uniforms. */
inline double draw_normal(Rng& g) {
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace causal
