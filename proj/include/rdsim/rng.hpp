#pragma once

#include <cstdint>
#include <random>

namespace rdsim {

// std::mt19937_64's output sequence is fixed by the standard, but the std::
// distributions are not, so all sampling goes through these helpers to keep
// generated traces and mixes identical across standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) {
        return 0;
    }
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % bound;
}

// Uniform double in [0, 1) with 53 bits of randomness.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

} // namespace rdsim
