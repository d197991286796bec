#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gibbsim {

struct Seed {
    std::uint64_t value = 0;
    friend bool operator==(Seed, Seed) = default;
};

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Per-item seed, independent of the order in which items are produced.
constexpr Seed derive_seed(Seed global, std::uint64_t index) noexcept
{
    return Seed{mix64(mix64(global.value) ^ mix64(index + 0x632BE59BD9B4E019ULL))};
}

/// mt19937_64 with samplers written out here rather than taken from
/// <random>, whose distributions are implementation-defined. Every sampler
/// consumes a fixed, documented number of engine outputs.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed.value) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits. One draw.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi). One draw.
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// One draw.
    bool bernoulli(double p) { return uniform01() < p; }

    /// Box-Muller, cosine branch only. Two draws.
    double normal(double mean = 0.0, double stddev = 1.0)
    {
        double u1 = 1.0 - uniform01(); // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Knuth's product method, split into chunks of mean <= 256 so exp(-mean)
    /// never underflows; sums of independent Poisson draws are Poisson.
    std::uint64_t poisson(double mean)
    {
        std::uint64_t total = 0;
        while (mean > 0.0) {
            const double chunk = std::min(mean, 256.0);
            mean -= chunk;
            const double limit = std::exp(-chunk);
            double prod = uniform01();
            while (prod > limit) {
                ++total;
                prod *= uniform01();
            }
        }
        return total;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace gibbsim
