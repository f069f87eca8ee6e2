#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "causim/base_functions.hpp"
#include "causim/context.hpp"
#include "causim/drift.hpp"
#include "causim/errors.hpp"
#include "causim/grid.hpp"
#include "causim/noise.hpp"
#include "causim/rng.hpp"

namespace causim {

// Full description of one interactive environment: k+1 arms (arm 0 is the
// untreated control), the dimension policy, the per-arm response surfaces,
// the drift signal, and the read-out noise channel.
struct EnvironmentSpec {
    std::size_t arms = 2; // k + 1
    DimensionPolicy dims;
    CoordinateDistribution entity_dist{}; // iid per observable coordinate
    BaseSpec base;
    DriftSpec drift;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    std::optional<std::int64_t> horizon; // round limit; unset = unbounded
};

inline std::vector<std::string> validate(const EnvironmentSpec& spec) {
    std::vector<std::string> errs;
    if (spec.arms < 2) {
        errs.push_back("arms: need at least 2 (one control plus one treatment)");
    }
    auto append = [&errs](std::vector<std::string> sub) {
        errs.insert(errs.end(), sub.begin(), sub.end());
    };
    append(validate(spec.dims));
    append(validate(spec.entity_dist, "entity"));
    if (spec_arm_count(spec.base) != spec.arms) {
        errs.push_back("base: describes " + std::to_string(spec_arm_count(spec.base))
                       + " arms, environment has " + std::to_string(spec.arms));
    }
    append(validate(spec.base, spec.arms, spec.dims.m_domain));
    append(validate(spec.drift));
    append(validate(spec.noise));
    if (spec.horizon && *spec.horizon < 0) {
        errs.push_back("horizon: must be >= 0");
    }
    return errs;
}

// Axis-aligned box of the base-function domain: masked observable
// coordinates first (entity support), then confounder coordinates.
inline std::vector<Interval> domain_box(const EnvironmentSpec& spec) {
    std::vector<Interval> box;
    box.reserve(spec.dims.m_domain);
    const auto mask = spec.dims.effective_mask();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        box.push_back(support_interval(spec.entity_dist));
    }
    for (std::size_t i = 0; i < spec.dims.confounder_count(); ++i) {
        box.push_back(support_interval(spec.dims.confounder_dist));
    }
    return box;
}

inline std::vector<Interval> entity_box(const EnvironmentSpec& spec) {
    return std::vector<Interval>(spec.dims.n_observed,
                                 support_interval(spec.entity_dist));
}

// Ground-truth side of one completed round. Only oracle-enabled exports and
// the evaluation pipeline ever see these fields.
struct OracleFields {
    std::vector<double> x_prime;
    double drift_value = 0.0;
    std::vector<double> base_values; // noiseless b_i for every arm
    double p_sim = 0.0;              // Bernoulli parameter actually used
};

struct InteractionRecord {
    std::int64_t t = 0;
    std::vector<double> x; // observable entity coordinates (length N)
    std::size_t cause = 0;
    int effect = 0; // 0 or 1
    std::optional<OracleFields> oracle;
};

struct Observation {
    std::int64_t t = 0;
    Entity entity;
};

// The interactive loop. One instance is single-logical-thread: interact
// mutates the round counter and the rng streams. Parallel experiments use
// one instance per seed; specs are freely shared.
//
// Protocol per round: observe() hands out the current entity (idempotent,
// no state advances), interact(C) applies the cause, draws the effect,
// advances t, and draws the next round's entity. The first entity is drawn
// at construction. Streams for entities, confounders, and effects are
// split from the master seed independently, so changing agent behavior or
// the noise spec never perturbs the entity sequence.
class Environment {
public:
    explicit Environment(EnvironmentSpec spec)
        : spec_(std::move(spec))
        , base_(compile_validated(spec_))
        , drift_(spec_.drift)
        , entity_rng_(derive_seed(spec_.seed, kEntityStream))
        , confounder_rng_(derive_seed(spec_.seed, kConfounderStream))
        , effect_rng_(derive_seed(spec_.seed, kEffectStream))
        , confounder_seed_(derive_seed(spec_.seed, kConfounderStream)) {
        draw_next();
    }

    const EnvironmentSpec& spec() const { return spec_; }
    std::size_t arms() const { return spec_.arms; }
    std::size_t observed_dims() const { return spec_.dims.n_observed; }
    std::int64_t round() const { return t_; }

    bool exhausted() const {
        return spec_.horizon && t_ >= *spec_.horizon;
    }

    // Agent-facing: the current round index and entity. Never exposes the
    // confounders, the drift value, or any b_i.
    Observation observe() const {
        require_live("observe");
        return Observation{t_, current_entity_};
    }

    int interact(std::size_t cause) {
        require_live("interact");
        if (cause >= spec_.arms) {
            throw std::out_of_range("interact: cause " + std::to_string(cause)
                                    + " out of range (arms = "
                                    + std::to_string(spec_.arms) + ")");
        }
        const double d = drift_(t_);
        std::vector<double> b(spec_.arms);
        for (std::size_t i = 0; i < spec_.arms; ++i) {
            b[i] = base_.eval(i, current_context_.x_prime, d);
        }
        const double p_sim = apply_noise(spec_.noise, b[cause], effect_rng_);
        const int effect = effect_rng_.bernoulli(p_sim) ? 1 : 0;

        last_record_ = InteractionRecord{
            t_, current_entity_.x, cause, effect,
            OracleFields{current_context_.x_prime, d, std::move(b), p_sim}};
        ++t_;
        draw_next();
        return effect;
    }

private:
    friend class OracleHandle;

    static CompiledBase compile_validated(const EnvironmentSpec& spec) {
        auto errs = validate(spec);
        if (!errs.empty()) {
            std::string joined;
            for (const auto& e : errs) {
                if (!joined.empty()) joined += "; ";
                joined += e;
            }
            throw ConfigError(joined);
        }
        return CompiledBase::compile(spec.base, spec.arms, spec.dims.m_domain);
    }

    void require_live(const char* op) const {
        if (exhausted()) {
            throw EpisodeComplete(std::string(op) + ": horizon of "
                                  + std::to_string(*spec_.horizon)
                                  + " rounds reached");
        }
    }

    void draw_next() {
        if (exhausted()) {
            return;
        }
        current_entity_ = sample_entity(spec_.entity_dist,
                                        spec_.dims.n_observed, entity_rng_);
        if (spec_.dims.persistence == ConfounderPersistence::per_entity) {
            current_context_ = extend_context_per_entity(
                current_entity_, spec_.dims, confounder_seed_);
        } else {
            current_context_ = extend_context(current_entity_, spec_.dims,
                                              confounder_rng_);
        }
    }

    EnvironmentSpec spec_;
    CompiledBase base_;
    DriftSignal drift_;
    RngStream entity_rng_;
    RngStream confounder_rng_;
    RngStream effect_rng_;
    std::uint64_t confounder_seed_;
    std::int64_t t_ = 0;
    Entity current_entity_;
    ExtendedContext current_context_;
    std::optional<InteractionRecord> last_record_;
};

// What baseline agents are handed: observe / interact plus the static shape
// of the problem. No member reaches confounders, drift, p_sim, or b_i.
class AgentView {
public:
    explicit AgentView(Environment& env) : env_(&env) {}

    Observation observe() const { return env_->observe(); }
    int interact(std::size_t cause) { return env_->interact(cause); }
    std::size_t arms() const { return env_->arms(); }
    std::size_t observed_dims() const { return env_->observed_dims(); }
    std::vector<Interval> context_box() const {
        return entity_box(env_->spec());
    }
    bool exhausted() const { return env_->exhausted(); }

private:
    Environment* env_;
};

// Ground-truth access, constructed separately from the agent surface so
// benchmark code can evaluate while agent code physically cannot peek. A
// default-constructed handle is disabled and throws on every query.
class OracleHandle {
public:
    OracleHandle() = default;
    explicit OracleHandle(Environment& env) : env_(&env) {}

    bool enabled() const { return env_ != nullptr; }

    // Noiseless ground truth b_i(x', d(t)) for any context and time.
    double true_response(std::size_t arm, std::span<const double> x_prime,
                         std::int64_t t) const {
        const Environment& env = require();
        return env.base_.eval(arm, x_prime, env.drift_(t));
    }

    std::vector<double> true_responses(std::span<const double> x_prime,
                                       std::int64_t t) const {
        const Environment& env = require();
        const double d = env.drift_(t);
        std::vector<double> b(env.arms());
        for (std::size_t i = 0; i < env.arms(); ++i) {
            b[i] = env.base_.eval(i, x_prime, d);
        }
        return b;
    }

    double drift_at(std::int64_t t) const { return require().drift_(t); }

    // The extended context the environment will feed to the base functions
    // on the next interact call.
    const ExtendedContext& pending_context() const {
        const Environment& env = require();
        if (env.exhausted()) {
            throw EpisodeComplete("pending_context: episode complete");
        }
        return env.current_context_;
    }

    const InteractionRecord& last_record() const {
        const Environment& env = require();
        if (!env.last_record_) {
            throw OracleAccessError("last_record: no interaction has happened yet");
        }
        return *env.last_record_;
    }

private:
    const Environment& require() const {
        if (!env_) {
            throw OracleAccessError("oracle access is disabled on this handle");
        }
        return *env_;
    }

    Environment* env_ = nullptr;
};

// ---------------------------------------------------------------------------
// Trajectory CSV export
// ---------------------------------------------------------------------------

inline void write_trajectory_header(std::ostream& out, std::size_t n_observed,
                                    std::size_t arms, std::size_t n_confounders,
                                    bool oracle) {
    out << "t,C,E";
    for (std::size_t i = 0; i < n_observed; ++i) {
        out << ",x_" << i;
    }
    if (oracle) {
        out << ",d";
        for (std::size_t i = 0; i < arms; ++i) {
            out << ",b_" << i;
        }
        out << ",p_sim";
        for (std::size_t i = 0; i < n_confounders; ++i) {
            out << ",u_" << i;
        }
    }
    out << "\n";
}

inline void write_trajectory_row(std::ostream& out,
                                 const InteractionRecord& rec, bool oracle) {
    out << rec.t << ',' << rec.cause << ',' << rec.effect;
    for (double v : rec.x) {
        out << ',' << format_double(v);
    }
    if (oracle) {
        if (!rec.oracle) {
            throw DataError("trajectory export: record at t="
                            + std::to_string(rec.t) + " has no oracle fields");
        }
        const OracleFields& of = *rec.oracle;
        out << ',' << format_double(of.drift_value);
        for (double v : of.base_values) {
            out << ',' << format_double(v);
        }
        out << ',' << format_double(of.p_sim);
        const std::size_t n_conf = of.x_prime.size() > rec.x.size()
            ? of.x_prime.size() - rec.x.size()
            : 0;
        for (std::size_t i = of.x_prime.size() - n_conf; i < of.x_prime.size();
             ++i) {
            out << ',' << format_double(of.x_prime[i]);
        }
    }
    out << "\n";
}

inline void write_trajectory_csv(std::ostream& out,
                                 const std::vector<InteractionRecord>& records,
                                 std::size_t n_observed, std::size_t arms,
                                 std::size_t n_confounders, bool oracle) {
    write_trajectory_header(out, n_observed, arms, n_confounders, oracle);
    for (const auto& rec : records) {
        write_trajectory_row(out, rec, oracle);
    }
}

} // namespace causim
