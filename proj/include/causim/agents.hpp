#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causim/environment.hpp"
#include "causim/errors.hpp"
#include "causim/evaluation.hpp"
#include "causim/rng.hpp"

namespace causim {

enum class AgentKind {
    uniform_random,
    fixed_arm,
    epsilon_greedy_two_model,
    thompson_binned,
    oracle_cheat, // benchmark-only; acts through the oracle handle
};

inline const char* agent_kind_name(AgentKind k) {
    switch (k) {
    case AgentKind::uniform_random: return "uniform-random";
    case AgentKind::fixed_arm: return "fixed-arm";
    case AgentKind::epsilon_greedy_two_model: return "epsilon-greedy-two-model";
    case AgentKind::thompson_binned: return "thompson-binned";
    case AgentKind::oracle_cheat: return "oracle-cheat";
    }
    return "?";
}

inline std::optional<AgentKind> parse_agent_kind(const std::string& name) {
    for (AgentKind k : {AgentKind::uniform_random, AgentKind::fixed_arm,
                        AgentKind::epsilon_greedy_two_model,
                        AgentKind::thompson_binned, AgentKind::oracle_cheat}) {
        if (name == agent_kind_name(k)) {
            return k;
        }
    }
    return std::nullopt;
}

struct AgentSpec {
    AgentKind kind = AgentKind::uniform_random;
    std::size_t fixed = 0;      // fixed-arm: which arm
    double epsilon = 0.1;       // epsilon-greedy
    std::size_t bins = 4;       // bins per context axis (binned learners)
    double prior_alpha = 1.0;   // thompson Beta prior
    double prior_beta = 1.0;
    std::uint64_t seed = 0;
};

inline std::vector<std::string> validate(const AgentSpec& spec,
                                         std::size_t arms,
                                         const std::string& path = "agent") {
    std::vector<std::string> errs;
    if (spec.kind == AgentKind::fixed_arm && spec.fixed >= arms) {
        errs.push_back(path + ".fixed: arm index out of range");
    }
    if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0)) {
        errs.push_back(path + ".epsilon: must lie in [0, 1]");
    }
    if (spec.bins < 1) {
        errs.push_back(path + ".bins: must be >= 1");
    }
    if (!(spec.prior_alpha > 0.0) || !(spec.prior_beta > 0.0)) {
        errs.push_back(path + ".prior: pseudo-counts must be > 0");
    }
    return errs;
}

// The generalisation map phi: uniform axis-aligned binning of the entity
// box. Out-of-box coordinates clamp to the edge bins.
class BinningScheme {
public:
    BinningScheme() = default;
    BinningScheme(std::vector<Interval> box, std::size_t bins_per_axis)
        : box_(std::move(box)), bins_(bins_per_axis == 0 ? 1 : bins_per_axis) {}

    std::size_t bin_count() const {
        std::size_t n = 1;
        for (std::size_t i = 0; i < box_.size(); ++i) {
            n *= bins_;
        }
        return n;
    }

    std::size_t bin_of(std::span<const double> x) const {
        if (x.size() != box_.size()) {
            throw ConfigError("binning: context has " + std::to_string(x.size())
                              + " dims, box has " + std::to_string(box_.size()));
        }
        std::size_t idx = 0;
        for (std::size_t d = 0; d < box_.size(); ++d) {
            const double width = box_[d].hi - box_[d].lo;
            std::size_t cell = 0;
            if (width > 0.0) {
                const double f = (x[d] - box_[d].lo) / width;
                const auto scaled =
                    static_cast<long long>(std::floor(f * static_cast<double>(bins_)));
                const long long top = static_cast<long long>(bins_) - 1;
                cell = static_cast<std::size_t>(std::clamp(scaled, 0LL, top));
            }
            idx = idx * bins_ + cell;
        }
        return idx;
    }

    const std::vector<Interval>& box() const { return box_; }
    std::size_t bins_per_axis() const { return bins_; }

private:
    std::vector<Interval> box_;
    std::size_t bins_ = 1;
};

// Snapshot of a binned learner, exportable for resume/inspection.
struct AgentSnapshot {
    std::string kind;
    std::size_t arms = 0;
    std::vector<Interval> box;
    std::size_t bins_per_axis = 0;
    // Flattened [bin][arm], both empty for stateless agents.
    std::vector<double> successes;
    std::vector<double> failures;
    std::int64_t rounds_seen = 0;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual std::size_t act(std::span<const double> x) = 0;
    virtual void learn(std::span<const double> /*x*/, std::size_t /*cause*/,
                       int /*effect*/) {}
    virtual AgentSnapshot snapshot() const = 0;
};

namespace detail {

// Shared per-bin per-arm success/failure tallies.
class BinnedCounts {
public:
    BinnedCounts() = default;
    BinnedCounts(BinningScheme phi, std::size_t arms)
        : phi_(std::move(phi))
        , arms_(arms)
        , successes_(phi_.bin_count() * arms, 0.0)
        , failures_(phi_.bin_count() * arms, 0.0) {}

    void record(std::span<const double> x, std::size_t cause, int effect) {
        const std::size_t at = phi_.bin_of(x) * arms_ + cause;
        if (effect != 0) {
            successes_[at] += 1.0;
        } else {
            failures_[at] += 1.0;
        }
        ++rounds_;
    }

    double successes(std::size_t bin, std::size_t arm) const {
        return successes_[bin * arms_ + arm];
    }
    double failures(std::size_t bin, std::size_t arm) const {
        return failures_[bin * arms_ + arm];
    }

    const BinningScheme& phi() const { return phi_; }
    std::size_t arms() const { return arms_; }
    std::int64_t rounds_seen() const { return rounds_; }

    void fill_snapshot(AgentSnapshot& snap) const {
        snap.arms = arms_;
        snap.box = phi_.box();
        snap.bins_per_axis = phi_.bins_per_axis();
        snap.successes = successes_;
        snap.failures = failures_;
        snap.rounds_seen = rounds_;
    }

private:
    BinningScheme phi_;
    std::size_t arms_ = 0;
    std::vector<double> successes_;
    std::vector<double> failures_;
    std::int64_t rounds_ = 0;
};

} // namespace detail

class UniformRandomAgent final : public Agent {
public:
    UniformRandomAgent(std::size_t arms, std::uint64_t seed)
        : arms_(arms), rng_(seed) {}

    std::size_t act(std::span<const double>) override {
        return rng_.uniform_index(arms_);
    }

    AgentSnapshot snapshot() const override {
        AgentSnapshot s;
        s.kind = agent_kind_name(AgentKind::uniform_random);
        s.arms = arms_;
        return s;
    }

private:
    std::size_t arms_;
    RngStream rng_;
};

class FixedArmAgent final : public Agent {
public:
    FixedArmAgent(std::size_t arms, std::size_t arm) : arms_(arms), arm_(arm) {
        if (arm_ >= arms_) {
            throw ConfigError("agent.fixed: arm index out of range");
        }
    }

    std::size_t act(std::span<const double>) override { return arm_; }

    AgentSnapshot snapshot() const override {
        AgentSnapshot s;
        s.kind = agent_kind_name(AgentKind::fixed_arm);
        s.arms = arms_;
        return s;
    }

private:
    std::size_t arms_;
    std::size_t arm_;
};

// Two-model baseline: each arm's response rate is estimated independently
// per bin (difference of the two models = the uplift estimate for k = 1).
// Untried (bin, arm) cells score a neutral 0.5 so unexplored arms are
// neither favored nor written off.
class EpsilonGreedyTwoModelAgent final : public Agent {
public:
    EpsilonGreedyTwoModelAgent(std::size_t arms, BinningScheme phi,
                               double epsilon, std::uint64_t seed)
        : counts_(std::move(phi), arms), epsilon_(epsilon), rng_(seed) {}

    std::size_t act(std::span<const double> x) override {
        if (rng_.uniform() < epsilon_) {
            return rng_.uniform_index(counts_.arms());
        }
        const std::size_t bin = counts_.phi().bin_of(x);
        std::vector<double> rate(counts_.arms());
        for (std::size_t i = 0; i < counts_.arms(); ++i) {
            const double s = counts_.successes(bin, i);
            const double f = counts_.failures(bin, i);
            rate[i] = (s + f) > 0.0 ? s / (s + f) : 0.5;
        }
        return argmax_tie_low(rate);
    }

    void learn(std::span<const double> x, std::size_t cause,
               int effect) override {
        counts_.record(x, cause, effect);
    }

    AgentSnapshot snapshot() const override {
        AgentSnapshot s;
        s.kind = agent_kind_name(AgentKind::epsilon_greedy_two_model);
        counts_.fill_snapshot(s);
        return s;
    }

private:
    detail::BinnedCounts counts_;
    double epsilon_;
    RngStream rng_;
};

// Per-bin per-arm Beta posteriors; plays the argmax of one posterior draw.
class ThompsonBinnedAgent final : public Agent {
public:
    ThompsonBinnedAgent(std::size_t arms, BinningScheme phi, double prior_alpha,
                        double prior_beta, std::uint64_t seed)
        : counts_(std::move(phi), arms)
        , prior_alpha_(prior_alpha)
        , prior_beta_(prior_beta)
        , rng_(seed) {}

    std::size_t act(std::span<const double> x) override {
        const std::size_t bin = counts_.phi().bin_of(x);
        std::vector<double> draw(counts_.arms());
        for (std::size_t i = 0; i < counts_.arms(); ++i) {
            draw[i] = rng_.beta(prior_alpha_ + counts_.successes(bin, i),
                                prior_beta_ + counts_.failures(bin, i));
        }
        return argmax_tie_low(draw);
    }

    void learn(std::span<const double> x, std::size_t cause,
               int effect) override {
        counts_.record(x, cause, effect);
    }

    AgentSnapshot snapshot() const override {
        AgentSnapshot s;
        s.kind = agent_kind_name(AgentKind::thompson_binned);
        counts_.fill_snapshot(s);
        return s;
    }

private:
    detail::BinnedCounts counts_;
    double prior_alpha_;
    double prior_beta_;
    RngStream rng_;
};

// Benchmark yardstick: reads the pending extended context and the true
// responses through the oracle and always plays the optimal arm. Baselines
// never get this channel.
class OracleCheatAgent final : public Agent {
public:
    explicit OracleCheatAgent(Environment& env) : env_(&env), oracle_(env) {}

    std::size_t act(std::span<const double>) override {
        const auto& ctx = oracle_.pending_context();
        return optimal_action(oracle_, ctx.x_prime, env_->round());
    }

    AgentSnapshot snapshot() const override {
        AgentSnapshot s;
        s.kind = agent_kind_name(AgentKind::oracle_cheat);
        s.arms = env_->arms();
        return s;
    }

private:
    Environment* env_;
    OracleHandle oracle_;
};

// Baseline factory. The oracle-cheat kind needs the environment itself and
// is created via make_oracle_cheat instead.
inline std::unique_ptr<Agent> make_agent(const AgentSpec& spec,
                                         std::size_t arms,
                                         const std::vector<Interval>& context_box) {
    auto errs = validate(spec, arms);
    if (!errs.empty()) {
        std::string joined;
        for (const auto& e : errs) {
            if (!joined.empty()) joined += "; ";
            joined += e;
        }
        throw ConfigError(joined);
    }
    switch (spec.kind) {
    case AgentKind::uniform_random:
        return std::make_unique<UniformRandomAgent>(arms, spec.seed);
    case AgentKind::fixed_arm:
        return std::make_unique<FixedArmAgent>(arms, spec.fixed);
    case AgentKind::epsilon_greedy_two_model:
        return std::make_unique<EpsilonGreedyTwoModelAgent>(
            arms, BinningScheme(context_box, spec.bins), spec.epsilon,
            spec.seed);
    case AgentKind::thompson_binned:
        return std::make_unique<ThompsonBinnedAgent>(
            arms, BinningScheme(context_box, spec.bins), spec.prior_alpha,
            spec.prior_beta, spec.seed);
    case AgentKind::oracle_cheat:
        throw ConfigError(
            "agent.kind: oracle-cheat is constructed from an environment "
            "(make_oracle_cheat), not from a spec");
    }
    throw ConfigError("agent.kind: unknown kind");
}

inline std::unique_ptr<Agent> make_oracle_cheat(Environment& env) {
    return std::make_unique<OracleCheatAgent>(env);
}

// ---------------------------------------------------------------------------
// Episode loop: observe -> act -> interact -> learn
// ---------------------------------------------------------------------------

struct EpisodeResult {
    std::vector<InteractionRecord> records;
    EpisodeReport report;
    bool truncated = false; // horizon ended the episode before `rounds`
};

inline EpisodeResult run_episode(Environment& env, Agent& agent,
                                 std::int64_t rounds, std::int64_t window = 0) {
    if (rounds < 1) {
        throw ConfigError("rounds: must be >= 1");
    }
    OracleHandle oracle(env);
    AgentView view(env);
    EpisodeResult result;
    result.records.reserve(static_cast<std::size_t>(rounds));
    for (std::int64_t r = 0; r < rounds; ++r) {
        if (view.exhausted()) {
            result.truncated = true;
            break;
        }
        const Observation obs = view.observe();
        const std::size_t cause = agent.act(obs.entity.x);
        const int effect = view.interact(cause);
        agent.learn(obs.entity.x, cause, effect);
        result.records.push_back(oracle.last_record());
    }
    result.report = evaluate_trajectory(result.records, window);
    return result;
}

} // namespace causim
