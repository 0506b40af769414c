#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ultraprob {

/// Uniform integer in [0, n) by rejection; unlike std::uniform_int_distribution
/// the stream is identical across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t n) {
    const std::uint64_t limit = (std::numeric_limits<std::uint64_t>::max() / n) * n;
    std::uint64_t r;
    do r = engine();
    while (r >= limit);
    return r % n;
}

/// Decorrelates per-instance seeds derived from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace ultraprob
