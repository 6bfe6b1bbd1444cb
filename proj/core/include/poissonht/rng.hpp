#pragma once

// Reproducible random streams.  Each replication owns a generator seeded by
// a pure function of (master_seed, replication_index, block): three
// splitmix64 absorption steps feeding std::mt19937_64.  Parallel replications
// therefore never share state, and results are independent of scheduling.
//
// Variates are derived from raw 64-bit words, not from std::distribution
// types, so sequences are identical across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>

namespace poissonht {

// Recorded in run manifests; bump when the derivation or variate recipes
// change.
inline constexpr const char* kRngVersion = "splitmix64+mt19937_64 v1";

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replication_index = 0;
};

namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master_seed,
                                 std::uint64_t replication_index,
                                 std::uint64_t block = 0) {
  std::uint64_t z = mix64(master_seed + kGolden);
  z = mix64(z + replication_index * kGolden + kGolden);
  z = mix64(z + block * kGolden + kGolden);
  return z;
}

inline std::mt19937_64 make_engine(const SeedSpec& seed,
                                   std::uint64_t block = 0) {
  return std::mt19937_64(
      stream_seed(seed.master_seed, seed.replication_index, block));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Exponential with the given rate; 1 - U lies in (0, 1], so the log is safe.
inline double exponential(std::mt19937_64& gen, double rate) {
  return -std::log(1.0 - uniform01(gen)) / rate;
}

}  // namespace rng
}  // namespace poissonht
