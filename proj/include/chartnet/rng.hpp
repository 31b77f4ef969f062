#pragma once

#include <cmath>
#include <cstdint>

namespace chartnet {

// Stateless counter-based generator. Every draw is a pure function of
// (seed, stream, index), so sampling is reproducible under any evaluation
// order and can be parallelized without shared state.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t h = mix(seed ^ 0x8f1bbcdcbfa53e0bULL);
  h = mix(h ^ stream);
  h = mix(h ^ index);
  return h;
}

// Uniform in the open interval (0, 1); never returns an endpoint.
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return (static_cast<double>(bits(seed, stream, index) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller; draw i consumes uniform indices 2i, 2i+1.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = uniform(seed, stream, 2 * index);
  const double u2 = uniform(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rng
}  // namespace chartnet
