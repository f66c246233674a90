#pragma once

#include <cstdint>
#include <random>

#include "sarcnn/error.hpp"

namespace sarcnn {

using Rng = std::mt19937_64;

/// Uniform draw on [lo, hi] built from the top 53 bits of one engine output, so the
/// stream is identical across standard libraries.
inline double uniform(Rng& rng, double lo, double hi) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

/// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    require(n > 0, "uniform_index: empty range");
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return static_cast<std::size_t>(x % n);
}

/// Fisher-Yates shuffle on top of uniform_index (std::shuffle is library-specific).
template <typename Container>
void shuffle(Container& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        std::swap(items[i - 1], items[j]);
    }
}

/// splitmix64 finaliser used to derive independent child seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

}  // namespace sarcnn
