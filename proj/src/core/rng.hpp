#pragma once

#include <cstdint>
#include <random>

namespace sfuda {

// All randomness derives from a single named seed; each purpose gets its own
// stream so toggling one component never perturbs another's draws.
enum class Stream : std::uint64_t {
  kModelInit = 1,
  kData = 2,
  kWeakAug = 3,
  kStrongAugQuery = 4,
  kStrongAugKey = 5,
  kComplementary = 6,
  kShuffle = 7,
  kSourceTrain = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

}  // namespace sfuda
