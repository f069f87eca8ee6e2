#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace causim {

// std::mt19937_64 output is fully specified by the standard, but the
// std::*_distribution adaptors are not. All variate generation below is
// explicit so that identical seeds give identical streams on every
// platform and standard library.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic child seed: stream `index` of master seed `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master;
    std::uint64_t out = 0;
    for (std::uint64_t i = 0; i <= index; ++i) {
        out = splitmix64(state);
    }
    return out;
}

// Stream indices split off an environment's master seed.
inline constexpr std::uint64_t kEntityStream = 0;
inline constexpr std::uint64_t kConfounderStream = 1;
inline constexpr std::uint64_t kEffectStream = 2;
inline constexpr std::uint64_t kAgentStream = 3;

class RngStream {
public:
    explicit RngStream(std::uint64_t seed)
        : engine_(seed) { }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased integer on [0, n).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) {
            throw std::invalid_argument("uniform_index: n must be positive");
        }
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max()
            - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v = engine_();
        while (v >= limit) {
            v = engine_();
        }
        return static_cast<std::size_t>(v % n);
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1))
            * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 boosted.
    double gamma(double shape) {
        if (!(shape > 0.0)) {
            throw std::invalid_argument("gamma: shape must be > 0");
        }
        if (shape < 1.0) {
            const double u = 1.0 - uniform(); // (0, 1]
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) {
                continue;
            }
            v = v * v * v;
            const double u = 1.0 - uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) {
                return d * v;
            }
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    // Consumes exactly one uniform regardless of p.
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace causim
