#pragma once

#include <cstdint>
#include <random>

namespace qnet {

/// Purpose tags for sub-seed derivation. Each random stream in an experiment
/// is keyed by (master seed, purpose, index) so that adding draws to one stream
/// never shifts another.
enum class SeedPurpose : std::uint64_t {
  kNetwork = 1,
  kDemands = 2,
  kDomains = 3,
  kFailure = 4,
  kReplicate = 5,
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t master, SeedPurpose purpose,
                          std::uint64_t index = 0) noexcept;

std::uint64_t derive_seed(std::uint64_t master, SeedPurpose purpose,
                          std::uint64_t index, std::uint64_t sub_index) noexcept;

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
/// Used instead of std::uniform_real_distribution so that outputs do not
/// depend on the standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
std::uint64_t uniform_index(Rng& rng, std::uint64_t lo, std::uint64_t hi);

}  // namespace qnet
