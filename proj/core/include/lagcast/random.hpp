#pragma once

#include <cstdint>
#include <random>

namespace lagcast {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent stream seeds from a
// master seed so that parallel and serial runs draw identical numbers.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of stream `stream` under `seed`: splitmix64(splitmix64(seed) ^ stream).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

// Uniform integer in [0, n) by rejection; independent of the standard
// library's distribution implementation.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % n);
  std::uint64_t draw = rng();
  while (draw >= limit) draw = rng();
  return draw % n;
}

}  // namespace lagcast

namespace lagcast {

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace lagcast
