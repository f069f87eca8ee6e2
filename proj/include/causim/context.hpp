#pragma once

#include <cstdint>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "causim/errors.hpp"
#include "causim/rng.hpp"

namespace causim {

// Observable feature vector of one entity, length N.
struct Entity {
    std::vector<double> x;

    std::size_t dims() const { return x.size(); }
};

// The M-dimensional base-function input: observable part followed by
// freshly sampled unobserved confounders (length M - N when N < M).
struct ExtendedContext {
    std::vector<double> x_prime;
    std::size_t n_observed = 0;
    std::size_t n_confounders = 0;

    std::size_t dims() const { return x_prime.size(); }
};

enum class DistKind { uniform, gaussian };

// Scalar distribution applied iid per coordinate.
struct CoordinateDistribution {
    DistKind kind = DistKind::uniform;
    double low = -1.0;   // uniform support
    double high = 1.0;
    double mean = 0.0;   // gaussian parameters
    double stddev = 1.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Nominal support used for binning and surface sweeps. Gaussian coordinates
// use mean +/- 3 stddev; samples outside are clamped by consumers.
inline Interval support_interval(const CoordinateDistribution& d) {
    if (d.kind == DistKind::uniform) {
        return {d.low, d.high};
    }
    return {d.mean - 3.0 * d.stddev, d.mean + 3.0 * d.stddev};
}

inline std::vector<std::string> validate(const CoordinateDistribution& d,
                                         const std::string& path) {
    std::vector<std::string> errs;
    if (d.kind == DistKind::uniform && !(d.low <= d.high)) {
        errs.push_back(path + ".low: must be <= high");
    }
    if (d.kind == DistKind::gaussian && !(d.stddev > 0.0)) {
        errs.push_back(path + ".stddev: must be > 0");
    }
    return errs;
}

// Whether the confounder part of x' is redrawn on every interaction or
// pinned per entity (derived deterministically from the entity coordinates).
enum class ConfounderPersistence { per_interaction, per_entity };

// Dimensionality policy: N observable dims vs. M base-function domain dims.
// N > M leaves N - |mask| dimensions obsolete; N < M appends M - N
// confounders drawn from confounder_dist.
struct DimensionPolicy {
    std::size_t n_observed = 0; // N
    std::size_t m_domain = 0;   // M
    std::vector<std::size_t> active_mask; // size min(N, M); identity if empty
    CoordinateDistribution confounder_dist{DistKind::gaussian, -1.0, 1.0, 0.0, 1.0};
    ConfounderPersistence persistence = ConfounderPersistence::per_interaction;

    std::vector<std::size_t> effective_mask() const {
        if (!active_mask.empty()) {
            return active_mask;
        }
        std::vector<std::size_t> mask(std::min(n_observed, m_domain));
        std::iota(mask.begin(), mask.end(), std::size_t{0});
        return mask;
    }

    std::size_t confounder_count() const {
        return m_domain > n_observed ? m_domain - n_observed : 0;
    }
};

inline std::vector<std::string> validate(const DimensionPolicy& p,
                                         const std::string& path = "") {
    const std::string prefix = path.empty() ? "" : path + ".";
    std::vector<std::string> errs;
    if (p.m_domain == 0) {
        errs.push_back(prefix + "M: must be >= 1");
    }
    if (!p.active_mask.empty()) {
        const std::size_t want = std::min(p.n_observed, p.m_domain);
        if (p.active_mask.size() != want) {
            errs.push_back(prefix + "active_mask: must have exactly "
                           + std::to_string(want) + " entries");
        }
        std::vector<bool> seen(p.n_observed, false);
        for (std::size_t i = 0; i < p.active_mask.size(); ++i) {
            const std::size_t idx = p.active_mask[i];
            if (idx >= p.n_observed || seen[idx]) {
                errs.push_back(prefix + "active_mask[" + std::to_string(i)
                               + "]: must be a distinct index < N");
                continue;
            }
            seen[idx] = true;
        }
        if (p.n_observed <= p.m_domain) {
            // Identity required: sub-selection only exists when N > M.
            for (std::size_t i = 0; i < p.active_mask.size(); ++i) {
                if (p.active_mask[i] != i) {
                    errs.push_back(prefix
                                   + "active_mask: must be the identity when N <= M");
                    break;
                }
            }
        }
    }
    auto sub = validate(p.confounder_dist, prefix + "confounder");
    errs.insert(errs.end(), sub.begin(), sub.end());
    return errs;
}

inline double sample_coordinate(const CoordinateDistribution& d, RngStream& rng) {
    if (d.kind == DistKind::uniform) {
        return rng.uniform(d.low, d.high);
    }
    return rng.normal(d.mean, d.stddev);
}

// N iid coordinates from the entity distribution. N = 0 gives the empty
// entity.
inline Entity sample_entity(const CoordinateDistribution& dist, std::size_t n,
                            RngStream& rng) {
    Entity e;
    e.x.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        e.x.push_back(sample_coordinate(dist, rng));
    }
    return e;
}

// Mixes the bit patterns of the entity coordinates with a base seed; used
// to pin per-entity confounders.
inline std::uint64_t entity_hash(const Entity& e, std::uint64_t base_seed) {
    std::uint64_t state = base_seed ^ 0x6a09e667f3bcc908ULL;
    for (double v : e.x) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        state ^= bits;
        (void)splitmix64(state);
    }
    return splitmix64(state);
}

namespace detail {

inline ExtendedContext build_extended(const Entity& e, const DimensionPolicy& p,
                                      RngStream& confounder_rng) {
    if (e.dims() != p.n_observed) {
        throw ConfigError("extend_context: entity has "
                          + std::to_string(e.dims()) + " dims, policy expects N = "
                          + std::to_string(p.n_observed));
    }
    ExtendedContext ctx;
    ctx.n_observed = p.n_observed;
    ctx.n_confounders = p.confounder_count();
    ctx.x_prime.reserve(p.m_domain);
    for (std::size_t idx : p.effective_mask()) {
        ctx.x_prime.push_back(e.x[idx]);
    }
    for (std::size_t i = 0; i < ctx.n_confounders; ++i) {
        ctx.x_prime.push_back(sample_coordinate(p.confounder_dist, confounder_rng));
    }
    return ctx;
}

} // namespace detail

// Fresh confounder draw per call (the default persistence).
inline ExtendedContext extend_context(const Entity& e, const DimensionPolicy& p,
                                      RngStream& confounder_rng) {
    return detail::build_extended(e, p, confounder_rng);
}

// Confounders pinned per entity: extending the same entity twice yields the
// same x'.
inline ExtendedContext extend_context_per_entity(const Entity& e,
                                                 const DimensionPolicy& p,
                                                 std::uint64_t confounder_seed) {
    RngStream rng(entity_hash(e, confounder_seed));
    return detail::build_extended(e, p, rng);
}

} // namespace causim
