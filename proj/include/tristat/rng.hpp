#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tristat {

// All random draws go through these helpers instead of std distributions,
// whose output is implementation-defined. mt19937_64 itself is pinned by the
// standard, so a fixed seed yields bit-identical streams on every platform.

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// uniform double in [0, 1) with 53-bit resolution
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& rng, double mu, double sigma) {
    // Box-Muller; the second variate is discarded to keep the stream position
    // a pure function of the number of calls
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(6.283185307179586 * u2);
}

// first `take` elements of a random permutation of 0..n-1, sorted ascending
inline std::vector<std::size_t> sample_indices(std::mt19937_64& rng, std::size_t n, std::size_t take) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < take && i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace tristat
