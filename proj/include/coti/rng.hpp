#pragma once

#include <cstdint>
#include <random>

namespace coti {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Named random streams. Each stream of a run is a pure function of
// (run seed, stream, index) so resuming from a snapshot replays exactly.
enum class Stream : std::uint64_t {
  NullGeneration = 1,
  SimilarResample = 2,
  EmbeddingGeneration = 3,
  RandomSelection = 4,
  Evaluation = 5,
  World = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept {
  return mix_seed(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(stream))) + index);
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace coti
