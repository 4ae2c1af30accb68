// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cfwpt {

/// Independent purposes that draw from the root seed. Each gets its own
/// stream so that, e.g., changing the number of Monte Carlo trials never
/// perturbs the sensor placement.
enum class Stream : std::uint64_t {
    Placement = 1,
    Shadowing = 2,
    Pilots = 3,
    SmallScale = 4,
    MonteCarlo = 5,
    Schedule = 6,
};

/// SplitMix64 finaliser; used to derive child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    /// Stream `which` of the root seed, optionally split further by `index`
    /// (trial number, slot number, ...).
    static Rng stream(std::uint64_t root, Stream which, std::uint64_t index = 0)
    {
        const std::uint64_t s = mix_seed(mix_seed(root) ^ mix_seed(static_cast<std::uint64_t>(which) << 32)) ^ mix_seed(index + 0x51ed2701ULL);
        return Rng(s);
    }

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return normal_(engine_); }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0)
    {
        const double s = std::sqrt(0.5 * variance);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace cfwpt
