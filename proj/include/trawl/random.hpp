#pragma once

// Seed derivation and the few variates the simulators need beyond <random>.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace trawl {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for (master_seed, index).
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(derive_seed(master_seed, index));
}

/// Uniform on (0, 1], never zero.
inline double uniform_open(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double random_sign(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

/// Standard symmetric alpha-stable variate, E exp(i theta X) = exp(-|theta|^alpha),
/// by the Chambers-Mallows-Stuck method.
inline double symmetric_stable(Rng& rng, double alpha) {
    const double v = std::numbers::pi * (uniform_open(rng) - 0.5);
    const double w = -std::log(uniform_open(rng));
    if (std::abs(alpha - 1.0) < 1e-12) return std::tan(v);
    const double cv = std::cos(v);
    return std::sin(alpha * v) / std::pow(cv, 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

}  // namespace trawl
