#pragma once

// Portable deterministic random source.
//
// The generator is part of the external contract: the same seed must yield
// the same test instances in any language. It is SplitMix64 (Steele, Lea,
// Flood 2014) with the standard constants, doubles taken from the top 53
// bits, and Gaussians produced by the basic Box-Muller transform. The exact
// recipe is reproduced in README.md.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace subspace_qsl {

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept
    {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// One Box-Muller draw; real and imaginary parts are independent N(0, 1).
    std::complex<double> complex_gaussian() noexcept
    {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    double gaussian() noexcept { return complex_gaussian().real(); }

private:
    std::uint64_t state_;
};

/// Independent sub-stream seed, e.g. one per verification trial or per retry.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    return SplitMix64(seed + (index + 1) * 0xD1B54A32D192ED03ULL).next();
}

} // namespace subspace_qsl
