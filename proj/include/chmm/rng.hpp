#pragma once

#include <cstdint>
#include <random>

namespace chmm {

using Rng = std::mt19937_64;

// SplitMix64 step; used to derive independent seed streams so that
// replicates and simulation stages can run in parallel while remaining
// reproducible for a fixed base seed, regardless of worker count.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace chmm
