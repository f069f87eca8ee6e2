#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "causim/base_functions.hpp"
#include "causim/rng.hpp"

namespace causim {

// Stochastic read-out channel between a base probability and the Bernoulli
// draw. The latent propensity is sampled around the base value with
// precision beta and squashed back onto (0, 1):
//
//     P ~ Normal(b, 1 / beta),   p_sim = sigmoid(scale * P)
//
// Disabled (the default), the channel passes b through untouched and draws
// nothing from the stream.
struct NoiseSpec {
    bool enabled = false;
    double beta = 25.0;
    double scale = 3.0;
};

inline std::vector<std::string> validate(const NoiseSpec& spec,
                                         const std::string& path = "noise") {
    std::vector<std::string> errs;
    if (!(spec.beta > 0.0) || !std::isfinite(spec.beta)) {
        errs.push_back(path + ".beta: precision must be > 0");
    }
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
        errs.push_back(path + ".scale: must be > 0");
    }
    return errs;
}

inline double apply_noise(const NoiseSpec& spec, double base_value,
                          RngStream& rng) {
    if (!spec.enabled) {
        return base_value;
    }
    const double propensity =
        rng.normal(base_value, 1.0 / std::sqrt(spec.beta));
    return sigmoid(spec.scale * propensity);
}

} // namespace causim
