#pragma once

#include <cstdint>
#include <random>

namespace perfdrift {

using Rng = std::mt19937_64;

/// Odd multiplier used to spread repetition indices across the seed space.
inline constexpr std::uint64_t kRepetitionSeedMix = 0x9E3779B97F4A7C15ULL;

/// Seed of repetition `rep` under a scenario's base seed.
[[nodiscard]] constexpr std::uint64_t repetition_seed(std::uint64_t base_seed, std::uint64_t rep) noexcept {
    return base_seed ^ (rep * kRepetitionSeedMix);
}

/// splitmix64 finalizer; derives independent sub-stream seeds (generator,
/// routing, model) from one repetition seed.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform real in [0, 1).
[[nodiscard]] inline double uniform01(Rng& rng) {
    // libstdc++ can round generate_canonical up to exactly 1.0.
    const double u = std::generate_canonical<double, 53>(rng);
    return u < 1.0 ? u : 0x1.fffffffffffffp-1;
}

/// Uniform real in [low, high).
[[nodiscard]] inline double uniform(Rng& rng, double low, double high) {
    return low + (high - low) * uniform01(rng);
}

}  // namespace perfdrift
