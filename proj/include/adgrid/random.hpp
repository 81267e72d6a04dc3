#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace adgrid::rng {

// std::mt19937 output is fully specified by the standard; the distributions
// are not. These helpers derive variates from raw draws only, so identical
// seeds give identical streams on any conforming implementation.

/// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform_unit(std::mt19937& gen) {
  const std::uint64_t hi = gen() >> 5;  // 27 bits
  const std::uint64_t lo = gen() >> 6;  // 26 bits
  return (static_cast<double>(hi) * 67108864.0 + static_cast<double>(lo)) *
         (1.0 / 9007199254740992.0);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(std::mt19937& gen, std::size_t n) {
  const std::size_t i = static_cast<std::size_t>(uniform_unit(gen) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

/// Standard normal via Box-Muller. Consumes two uniforms per call.
inline double normal(std::mt19937& gen) {
  double u1 = uniform_unit(gen);
  const double u2 = uniform_unit(gen);
  if (u1 <= 0.0) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace adgrid::rng
