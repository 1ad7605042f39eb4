#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cpceval {

// Stable 64-bit FNV-1a. Used for rng substream derivation and artifact keys;
// must not change across builds or resumed runs break.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Named substream of the master seed. All randomness in a run flows through
// these so one seed reproduces everything (generation, tie-break,
// variation-pick, label-shuffle get distinct names).
inline std::mt19937_64 substream(std::uint64_t master_seed, std::string_view name) {
  std::seed_seq seq{master_seed, fnv1a(name)};
  return std::mt19937_64(seq);
}

// Indexed substream, e.g. one stream per episode or per worker.
inline std::mt19937_64 substream(std::uint64_t master_seed, std::string_view name,
                                 std::uint64_t index) {
  std::seed_seq seq{master_seed, fnv1a(name), index};
  return std::mt19937_64(seq);
}

}  // namespace cpceval
