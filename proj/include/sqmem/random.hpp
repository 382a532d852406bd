#pragma once

#include <cstdint>
#include <random>

namespace sqmem {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of item `index` in the ensemble `purpose` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return mix64(mix64(seed ^ mix64(purpose)) + index);
}

/// Independent generator for substream `stream` of a run seeded with `seed`.
/// The result depends only on (seed, stream), never on which thread asks.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)), static_cast<std::uint32_t>(mix64(seed) >> 32),
                    static_cast<std::uint32_t>(mix64(stream ^ 0x5851f42d4c957f2dULL)),
                    static_cast<std::uint32_t>(mix64(stream ^ 0x5851f42d4c957f2dULL) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace sqmem
