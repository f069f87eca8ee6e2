#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "causim/base_functions.hpp"
#include "causim/environment.hpp"
#include "causim/errors.hpp"
#include "causim/noise.hpp"
#include "causim/rng.hpp"

namespace causim {

// Monte-Carlo invariant checks over a configured environment. Each check is
// a pure function of its rng stream, so a selfcheck run is reproducible.
// The noise channel is injectable so the suite can be shown to catch a
// corrupted implementation (and not vacuously pass).

struct CheckResult {
    std::string name;
    bool passed = false;
    double statistic = 0.0; // measured deviation
    double tolerance = 0.0;
};

using NoiseChannelFn =
    std::function<double(const NoiseSpec&, double, RngStream&)>;

inline constexpr std::uint64_t kSelfcheckSalt = 0x5e1fc3ec;

// Every b_i must land in [0, 1] across the domain box and a spread of
// times. Mixture weights are validated to sum to 1 only within 1e-9, so
// convex combinations may overshoot by that much.
inline CheckResult check_base_range(const EnvironmentSpec& spec,
                                    std::size_t points, RngStream& rng) {
    const CompiledBase base =
        CompiledBase::compile(spec.base, spec.arms, spec.dims.m_domain);
    const auto box = domain_box(spec);
    const std::int64_t probes[] = {0, 1, 17, 400, 9999};
    double worst = 0.0;
    std::vector<double> x(box.size());
    for (std::size_t n = 0; n < points; ++n) {
        for (std::size_t i = 0; i < box.size(); ++i) {
            x[i] = rng.uniform(box[i].lo, box[i].hi);
        }
        for (std::int64_t t : probes) {
            const double d = eval_drift(spec.drift, t);
            for (std::size_t arm = 0; arm < spec.arms; ++arm) {
                const double v = base.eval(arm, x, d);
                const double outside = v < 0.0 ? -v : (v > 1.0 ? v - 1.0 : 0.0);
                if (outside > worst) worst = outside;
            }
        }
    }
    return {"base-range", worst <= 1e-9, worst, 1e-9};
}

// The pre-squash propensity must average to the base value: sample mean of
// P over `draws` within 4 standard errors of b.
inline CheckResult check_presigmoid_mean(double beta, double b,
                                         std::int64_t draws, RngStream& rng) {
    const double sd = 1.0 / std::sqrt(beta);
    double sum = 0.0;
    for (std::int64_t i = 0; i < draws; ++i) {
        sum += rng.normal(b, sd);
    }
    const double mean = sum / static_cast<double>(draws);
    const double tol = 4.0 * sd / std::sqrt(static_cast<double>(draws));
    char label[64];
    std::snprintf(label, sizeof label, "presigmoid-mean[b=%g]", b);
    return {label, std::abs(mean - b) <= tol, std::abs(mean - b), tol};
}

// Empirical E=1 frequency against the average Bernoulli parameter actually
// used. With noise disabled the parameter is constant at b.
inline CheckResult check_bernoulli_fidelity(const NoiseSpec& noise, double b,
                                            std::int64_t draws, RngStream& rng,
                                            const NoiseChannelFn& channel,
                                            const std::string& label) {
    double p_sum = 0.0;
    std::int64_t ones = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
        const double p = channel(noise, b, rng);
        p_sum += p;
        if (rng.bernoulli(p)) ++ones;
    }
    const double p_bar = p_sum / static_cast<double>(draws);
    const double freq = static_cast<double>(ones) / static_cast<double>(draws);
    const double tol =
        3.0 * std::sqrt(p_bar * (1.0 - p_bar) / static_cast<double>(draws));
    return {label, std::abs(freq - p_bar) <= tol, std::abs(freq - p_bar), tol};
}

// Disabled channel is the identity on b, exactly.
inline CheckResult check_noise_bypass(const NoiseSpec& noise,
                                      std::size_t values, RngStream& rng,
                                      const NoiseChannelFn& channel) {
    NoiseSpec off = noise;
    off.enabled = false;
    double worst = 0.0;
    for (std::size_t i = 0; i < values; ++i) {
        const double b = rng.uniform();
        const double diff = std::abs(channel(off, b, rng) - b);
        if (diff > worst) worst = diff;
    }
    return {"noise-bypass", worst == 0.0, worst, 0.0};
}

// At precision 1e12 the propensity collapses onto b, so the channel output
// must approach sigmoid(scale * b).
inline CheckResult check_sigmoid_limit(double scale, std::size_t values,
                                       RngStream& rng,
                                       const NoiseChannelFn& channel) {
    NoiseSpec hi;
    hi.enabled = true;
    hi.beta = 1e12;
    hi.scale = scale;
    double worst = 0.0;
    for (std::size_t i = 0; i < values; ++i) {
        const double b = rng.uniform();
        const double diff = std::abs(channel(hi, b, rng) - sigmoid(scale * b));
        if (diff > worst) worst = diff;
    }
    return {"sigmoid-limit", worst < 1e-4, worst, 1e-4};
}

inline std::vector<CheckResult>
run_selfcheck(const EnvironmentSpec& spec, std::int64_t draws,
              const NoiseChannelFn& channel = [](const NoiseSpec& n, double b,
                                                 RngStream& r) {
                  return apply_noise(n, b, r);
              }) {
    if (draws < 10000) {
        throw ConfigError("draws: must be >= 10000");
    }
    auto errs = validate(spec);
    if (!errs.empty()) {
        throw ConfigError(errs.front());
    }
    RngStream rng(derive_seed(spec.seed, kSelfcheckSalt));
    std::vector<CheckResult> results;
    results.push_back(check_base_range(spec, 2000, rng));
    for (double b : {0.1, 0.5, 0.9}) {
        results.push_back(check_presigmoid_mean(spec.noise.beta, b, draws, rng));
    }
    // Bernoulli fidelity at real base values from the configured surfaces.
    const CompiledBase base =
        CompiledBase::compile(spec.base, spec.arms, spec.dims.m_domain);
    const auto box = domain_box(spec);
    const double d0 = eval_drift(spec.drift, 0);
    std::vector<double> x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        x[i] = rng.uniform(box[i].lo, box[i].hi);
    }
    for (std::size_t arm = 0; arm < spec.arms && arm < 3; ++arm) {
        const double b = base.eval(arm, x, d0);
        results.push_back(check_bernoulli_fidelity(
            spec.noise, b, draws, rng, channel,
            "bernoulli-fidelity[arm=" + std::to_string(arm) + "]"));
    }
    results.push_back(check_noise_bypass(spec.noise, 100, rng, channel));
    results.push_back(check_sigmoid_limit(spec.noise.scale, 1000, rng, channel));
    return results;
}

} // namespace causim
