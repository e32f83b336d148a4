#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace srce {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent child seed from a parent seed and a sequence of
/// stream tags. Distinct tag sequences give statistically unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(seed);
    for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return s;
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

}  // namespace srce
