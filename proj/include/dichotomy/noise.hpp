#pragma once

// Counter-based noise: the value at cell i depends only on (seed, stream, i),
// so 1D and 2D fields come out the same whatever order they are filled in.

#include <cstdint>

#include "dichotomy/grid.hpp"

namespace dichotomy {

/// splitmix64 finaliser.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform in [-1, 1) for the given counter.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t h = mix64(mix64(mix64(seed) ^ stream) ^ index);
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

/// Adds amplitude * U[-1, 1) to every cell.
inline void add_noise(Field& f, double amplitude, std::uint64_t seed, std::uint64_t stream = 0) {
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += amplitude * counter_uniform(seed, stream, i);
}

}  // namespace dichotomy
