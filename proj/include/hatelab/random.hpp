#pragma once

#include <cstdint>
#include <random>

namespace hatelab {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag (splitmix64 finalizer) so that
/// independent consumers of one experiment seed get decorrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream tags used across the library.
namespace streams {
inline constexpr std::uint64_t kEmbedding = 1;
inline constexpr std::uint64_t kWeights = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kDropout = 4;
inline constexpr std::uint64_t kFolds = 5;
inline constexpr std::uint64_t kSynthetic = 6;
inline constexpr std::uint64_t kFoldRun = 100;
}  // namespace streams

}  // namespace hatelab
