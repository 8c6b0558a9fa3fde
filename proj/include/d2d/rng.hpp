#pragma once

#include <cstdint>
#include <random>

namespace d2d {

using Rng = std::mt19937_64;

// Independent substreams derived from one root seed. Each consumer draws from
// its own stream so that, e.g., extra solver randomness never perturbs the
// generated scenario.
enum class SeedStream : std::uint64_t {
  kScenario = 0x5c3a,
  kCsi = 0xc51d,
  kSolver = 0x501e,
  kSweep = 0x5ee9,
  kQueue = 0x9e7e,
  kEnumeration = 0xe0a1,
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for substream `stream`, item `index`, of `root`.
std::uint64_t derive_seed(std::uint64_t root, SeedStream stream, std::uint64_t index = 0) noexcept;

inline Rng make_rng(std::uint64_t root, SeedStream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

}  // namespace d2d
