#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "causim/errors.hpp"
#include "causim/rng.hpp"

namespace causim {

// Drift signal d(t): t -> R+, hidden from agents. Time is the interaction
// counter: t advances by 1 per environment round.
enum class DriftKind {
    constant,
    linear,
    sinusoidal,
    step,
    random_walk,
};

struct DriftChangePoint {
    std::int64_t at = 0;
    double level = 0.0;
};

struct DriftSpec {
    DriftKind kind = DriftKind::constant;

    double level = 0.0; // constant

    double intercept = 0.0; // linear, clamped at 0 to stay in R+
    double slope = 0.0;

    double amplitude = 0.0; // sinusoidal: A * (sin(w t + phi) + 1) / 2
    double omega = 0.0;
    double phase = 0.0;

    double initial = 0.0;                    // step: level before first change point
    std::vector<DriftChangePoint> changes;   // step: sorted, strictly increasing t

    double step_scale = 0.0;  // random walk increment scale
    std::uint64_t seed = 0;   // random walk seed; walk reflects at 0
};

inline const char* drift_kind_name(DriftKind k) {
    switch (k) {
    case DriftKind::constant: return "constant";
    case DriftKind::linear: return "linear";
    case DriftKind::sinusoidal: return "sinusoidal";
    case DriftKind::step: return "step";
    case DriftKind::random_walk: return "random-walk";
    }
    return "?";
}

inline std::vector<std::string> validate(const DriftSpec& spec,
                                         const std::string& path = "drift") {
    std::vector<std::string> errs;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) errs.push_back(path + "." + msg);
    };
    switch (spec.kind) {
    case DriftKind::constant:
        require(spec.level >= 0.0, "level: must be >= 0");
        break;
    case DriftKind::linear:
        require(spec.intercept >= 0.0, "intercept: must be >= 0");
        require(std::isfinite(spec.slope), "slope: must be finite");
        break;
    case DriftKind::sinusoidal:
        require(spec.amplitude >= 0.0, "amplitude: must be >= 0");
        require(std::isfinite(spec.omega), "omega: must be finite");
        require(std::isfinite(spec.phase), "phase: must be finite");
        break;
    case DriftKind::step: {
        require(spec.initial >= 0.0, "initial: must be >= 0");
        std::int64_t prev = -1;
        for (std::size_t i = 0; i < spec.changes.size(); ++i) {
            const auto& c = spec.changes[i];
            if (c.at <= prev || c.at < 0) {
                errs.push_back(path + ".changes[" + std::to_string(i)
                               + "].at: must be >= 0 and strictly increasing");
            }
            if (c.level < 0.0) {
                errs.push_back(path + ".changes[" + std::to_string(i)
                               + "].level: must be >= 0");
            }
            prev = c.at;
        }
        break;
    }
    case DriftKind::random_walk:
        require(spec.step_scale >= 0.0, "step_scale: must be >= 0");
        require(spec.initial >= 0.0, "initial: must be >= 0");
        break;
    }
    return errs;
}

namespace detail {

inline double drift_closed_form(const DriftSpec& spec, std::int64_t t) {
    switch (spec.kind) {
    case DriftKind::constant:
        return spec.level;
    case DriftKind::linear:
        return std::max(0.0, spec.intercept
                                 + spec.slope * static_cast<double>(t));
    case DriftKind::sinusoidal:
        return spec.amplitude
            * (std::sin(spec.omega * static_cast<double>(t) + spec.phase)
               + 1.0)
            / 2.0;
    case DriftKind::step: {
        double level = spec.initial;
        for (const auto& c : spec.changes) {
            if (c.at > t) break;
            level = c.level;
        }
        return level;
    }
    case DriftKind::random_walk:
        break; // handled by the caller
    }
    return 0.0;
}

} // namespace detail

// Pure evaluation of d(t). The random walk is recomputed from its seed each
// call (O(t)); use DriftSignal when evaluating many points of one spec.
inline double eval_drift(const DriftSpec& spec, std::int64_t t) {
    if (t < 0) {
        throw std::invalid_argument("eval_drift: t must be >= 0");
    }
    if (spec.kind != DriftKind::random_walk) {
        return detail::drift_closed_form(spec, t);
    }
    RngStream rng(spec.seed);
    double w = spec.initial;
    for (std::int64_t i = 1; i <= t; ++i) {
        w += spec.step_scale * rng.normal();
    }
    return std::abs(w);
}

// Caching evaluator over one spec. Same values as eval_drift; the walk
// prefix is extended lazily. Not safe for concurrent use from several
// threads; environments own one instance each.
class DriftSignal {
public:
    explicit DriftSignal(DriftSpec spec)
        : spec_(std::move(spec))
        , walk_rng_(spec_.seed) {
        if (spec_.kind == DriftKind::random_walk) {
            walk_.push_back(spec_.initial);
        }
    }

    double operator()(std::int64_t t) const {
        if (t < 0) {
            throw std::invalid_argument("drift: t must be >= 0");
        }
        if (spec_.kind != DriftKind::random_walk) {
            return detail::drift_closed_form(spec_, t);
        }
        while (static_cast<std::int64_t>(walk_.size()) <= t) {
            walk_.push_back(walk_.back() + spec_.step_scale * walk_rng_.normal());
        }
        return std::abs(walk_[static_cast<std::size_t>(t)]);
    }

    const DriftSpec& spec() const { return spec_; }

private:
    DriftSpec spec_;
    mutable std::vector<double> walk_;
    mutable RngStream walk_rng_;
};

} // namespace causim
