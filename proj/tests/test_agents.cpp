#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <causim/agents.hpp>

using causim::Agent;
using causim::AgentKind;
using causim::AgentSpec;
using causim::BinningScheme;
using causim::DistKind;
using causim::Environment;
using causim::EnvironmentSpec;
using causim::EpsilonGreedyTwoModelAgent;
using causim::FixedArmAgent;
using causim::Interval;
using causim::SineBaseSpec;
using causim::ThompsonBinnedAgent;
using causim::UniformRandomAgent;

namespace {

EnvironmentSpec sine_env(std::uint64_t seed) {
    EnvironmentSpec spec;
    spec.arms = 2;
    spec.dims.n_observed = 2;
    spec.dims.m_domain = 2;
    spec.entity_dist.kind = DistKind::uniform;
    SineBaseSpec base;
    base.lambda = {2, 1};
    base.g = {0.7, 0.7};
    spec.base.v = base;
    spec.seed = seed;
    spec.noise.enabled = true;
    return spec;
}

std::vector<Interval> unit_box(std::size_t dims) {
    return std::vector<Interval>(dims, Interval{-1.0, 1.0});
}

// Test probe: plays arm 0 and records the width of every context it is shown.
class WidthProbeAgent final : public Agent {
public:
    std::size_t act(std::span<const double> x) override {
        act_widths.push_back(x.size());
        return 0;
    }
    void learn(std::span<const double> x, std::size_t, int) override {
        learn_widths.push_back(x.size());
    }
    causim::AgentSnapshot snapshot() const override { return {}; }

    std::vector<std::size_t> act_widths;
    std::vector<std::size_t> learn_widths;
};

} // namespace

TEST_CASE("agent kind names round-trip", "[agents]") {
    for (AgentKind k : {AgentKind::uniform_random, AgentKind::fixed_arm,
                        AgentKind::epsilon_greedy_two_model,
                        AgentKind::thompson_binned, AgentKind::oracle_cheat}) {
        const auto parsed = causim::parse_agent_kind(causim::agent_kind_name(k));
        REQUIRE(parsed.has_value());
        REQUIRE(*parsed == k);
    }
    REQUIRE(causim::parse_agent_kind("uniform-random").value()
            == AgentKind::uniform_random);
    REQUIRE_FALSE(causim::parse_agent_kind("bandit").has_value());
}

TEST_CASE("agent spec validation", "[agents]") {
    AgentSpec spec;
    spec.kind = AgentKind::fixed_arm;
    spec.fixed = 2;
    auto errs = causim::validate(spec, 2);
    REQUIRE(errs.size() == 1);
    REQUIRE_THAT(errs[0], Catch::Matchers::ContainsSubstring("agent.fixed"));

    spec = AgentSpec{};
    spec.epsilon = 1.5;
    errs = causim::validate(spec, 2);
    REQUIRE(errs.size() == 1);
    REQUIRE_THAT(errs[0], Catch::Matchers::ContainsSubstring("epsilon"));

    spec = AgentSpec{};
    spec.bins = 0;
    spec.prior_alpha = 0.0;
    errs = causim::validate(spec, 2, "agents[1]");
    REQUIRE(errs.size() == 2);
    REQUIRE_THAT(errs[0], Catch::Matchers::StartsWith("agents[1].bins"));
    REQUIRE_THAT(errs[1], Catch::Matchers::ContainsSubstring("prior"));
}

TEST_CASE("binning maps the box uniformly and clamps outside", "[agents]") {
    BinningScheme phi(unit_box(1), 4);
    REQUIRE(phi.bin_count() == 4);
    REQUIRE(phi.bin_of(std::vector<double>{-1.0}) == 0);
    REQUIRE(phi.bin_of(std::vector<double>{-0.9}) == 0);
    REQUIRE(phi.bin_of(std::vector<double>{-0.5}) == 1);
    REQUIRE(phi.bin_of(std::vector<double>{0.0}) == 2);
    REQUIRE(phi.bin_of(std::vector<double>{0.999}) == 3);
    REQUIRE(phi.bin_of(std::vector<double>{1.0}) == 3);   // top edge clamps in
    REQUIRE(phi.bin_of(std::vector<double>{-50.0}) == 0); // clamp below
    REQUIRE(phi.bin_of(std::vector<double>{50.0}) == 3);  // clamp above

    BinningScheme phi2(unit_box(2), 4);
    REQUIRE(phi2.bin_count() == 16);
    // Row-major: first axis slowest.
    REQUIRE(phi2.bin_of(std::vector<double>{-1.0, -1.0}) == 0);
    REQUIRE(phi2.bin_of(std::vector<double>{-1.0, 0.999}) == 3);
    REQUIRE(phi2.bin_of(std::vector<double>{0.999, -1.0}) == 12);

    REQUIRE_THROWS_AS(phi2.bin_of(std::vector<double>{0.0}), causim::ConfigError);

    // Empty box (no observable dims) collapses to a single bin.
    BinningScheme none(unit_box(0), 4);
    REQUIRE(none.bin_count() == 1);
    REQUIRE(none.bin_of(std::vector<double>{}) == 0);
}

TEST_CASE("uniform-random agent plays all arms evenly", "[agents]") {
    UniformRandomAgent agent(3, 7);
    std::vector<int> counts(3, 0);
    const int n = 30000;
    const std::vector<double> x{0.0};
    for (int i = 0; i < n; ++i) {
        ++counts[agent.act(x)];
    }
    for (int c : counts) {
        // 4-sigma band around n/3.
        REQUIRE(std::abs(c - n / 3.0) < 4.0 * std::sqrt(n / 3.0 * (2.0 / 3.0)));
    }

    UniformRandomAgent a(3, 5);
    UniformRandomAgent b(3, 5);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.act(x) == b.act(x));
    }
    REQUIRE(agent.snapshot().kind == "uniform-random");
}

TEST_CASE("fixed-arm agent is constant and bound-checked", "[agents]") {
    FixedArmAgent agent(3, 2);
    const std::vector<double> x{0.4};
    for (int i = 0; i < 10; ++i) {
        REQUIRE(agent.act(x) == 2);
    }
    REQUIRE_THROWS_AS(FixedArmAgent(3, 3), causim::ConfigError);
}

TEST_CASE("greedy arm choice follows the per-bin response rates", "[agents]") {
    EpsilonGreedyTwoModelAgent agent(2, BinningScheme(unit_box(1), 2), 0.0, 1);
    const std::vector<double> left{-0.5};
    const std::vector<double> right{0.5};

    // Left bin: arm 0 always rewarded, arm 1 never.
    agent.learn(left, 0, 1);
    agent.learn(left, 0, 1);
    agent.learn(left, 1, 0);
    agent.learn(left, 1, 0);
    REQUIRE(agent.act(left) == 0);

    // Learning is bin-local: the right bin is still untried and ties at the
    // neutral 0.5, which resolves to the control arm.
    REQUIRE(agent.act(right) == 0);

    // An arm beating the neutral score wins over an untried one ...
    agent.learn(right, 1, 1);
    REQUIRE(agent.act(right) == 1);
    // ... and one falling below 0.5 loses to it.
    agent.learn(right, 1, 0);
    agent.learn(right, 1, 0);
    REQUIRE(agent.act(right) == 0);

    const auto snap = agent.snapshot();
    REQUIRE(snap.kind == "epsilon-greedy-two-model");
    REQUIRE(snap.bins_per_axis == 2);
    REQUIRE(snap.rounds_seen == 7);
    REQUIRE(snap.successes.size() == 4); // 2 bins x 2 arms
    REQUIRE(snap.successes[0] == 2.0);   // bin 0, arm 0
    REQUIRE(snap.failures[1] == 2.0);    // bin 0, arm 1
}

TEST_CASE("full exploration spreads arms evenly", "[agents]") {
    EpsilonGreedyTwoModelAgent agent(2, BinningScheme(unit_box(1), 2), 1.0, 9);
    const std::vector<double> x{0.0};
    int ones = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        ones += agent.act(x) == 1 ? 1 : 0;
    }
    REQUIRE(std::abs(ones / static_cast<double>(n) - 0.5) < 0.02);
}

TEST_CASE("posterior sampling locks onto a dominant arm", "[agents]") {
    ThompsonBinnedAgent agent(2, BinningScheme(unit_box(1), 1), 1.0, 1.0, 3);
    const std::vector<double> x{0.0};
    for (int i = 0; i < 1000; ++i) {
        agent.learn(x, 0, 1); // arm 0: all successes
        agent.learn(x, 1, 0); // arm 1: all failures
    }
    for (int i = 0; i < 100; ++i) {
        REQUIRE(agent.act(x) == 0);
    }
    const auto snap = agent.snapshot();
    REQUIRE(snap.kind == "thompson-binned");
    REQUIRE(snap.successes[0] == 1000.0);
    REQUIRE(snap.failures[1] == 1000.0);
    REQUIRE(snap.rounds_seen == 2000);
}

TEST_CASE("an uninformed posterior still explores both arms", "[agents]") {
    ThompsonBinnedAgent agent(2, BinningScheme(unit_box(1), 1), 1.0, 1.0, 11);
    const std::vector<double> x{0.0};
    bool saw0 = false;
    bool saw1 = false;
    for (int i = 0; i < 200; ++i) {
        const auto a = agent.act(x);
        saw0 = saw0 || a == 0;
        saw1 = saw1 || a == 1;
    }
    REQUIRE(saw0);
    REQUIRE(saw1);
}

TEST_CASE("the factory builds every spec-driven kind", "[agents]") {
    const auto box = unit_box(2);
    for (AgentKind k : {AgentKind::uniform_random, AgentKind::fixed_arm,
                        AgentKind::epsilon_greedy_two_model,
                        AgentKind::thompson_binned}) {
        AgentSpec spec;
        spec.kind = k;
        auto agent = causim::make_agent(spec, 2, box);
        REQUIRE(agent != nullptr);
        REQUIRE(agent->snapshot().kind == causim::agent_kind_name(k));
    }

    AgentSpec cheat;
    cheat.kind = AgentKind::oracle_cheat;
    REQUIRE_THROWS_AS(causim::make_agent(cheat, 2, box), causim::ConfigError);

    AgentSpec bad;
    bad.kind = AgentKind::fixed_arm;
    bad.fixed = 5;
    REQUIRE_THROWS_AS(causim::make_agent(bad, 2, box), causim::ConfigError);
}

TEST_CASE("the episode loop feeds agents observables only", "[agents]") {
    auto spec = sine_env(99);
    spec.dims.n_observed = 1; // one confounder hidden from the agent
    spec.dims.m_domain = 2;
    Environment env(spec);
    WidthProbeAgent probe;
    const auto result = causim::run_episode(env, probe, 20);
    REQUIRE(result.records.size() == 20);
    REQUIRE(probe.act_widths.size() == 20);
    for (std::size_t w : probe.act_widths) {
        REQUIRE(w == 1);
    }
    for (std::size_t w : probe.learn_widths) {
        REQUIRE(w == 1);
    }
    // The logged ground truth still carries the full extended context.
    REQUIRE(result.records[0].oracle->x_prime.size() == 2);
}

TEST_CASE("episodes respect rounds, horizons, and windows", "[agents]") {
    Environment env(sine_env(5));
    UniformRandomAgent agent(2, 1);
    const auto result = causim::run_episode(env, agent, 100, 25);
    REQUIRE_FALSE(result.truncated);
    REQUIRE(result.records.size() == 100);
    REQUIRE(result.report.rounds == 100);
    REQUIRE(result.report.window == 25);
    REQUIRE(result.report.window_regret.size() == 4);

    auto bounded = sine_env(5);
    bounded.horizon = 30;
    Environment benv(bounded);
    UniformRandomAgent a2(2, 1);
    const auto cut = causim::run_episode(benv, a2, 100);
    REQUIRE(cut.truncated);
    REQUIRE(cut.records.size() == 30);

    Environment e3(sine_env(5));
    UniformRandomAgent a3(2, 1);
    REQUIRE_THROWS_AS(causim::run_episode(e3, a3, 0), causim::ConfigError);
}

TEST_CASE("the cheating benchmark achieves exactly zero regret", "[agents]") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Environment env(sine_env(seed));
        auto cheat = causim::make_oracle_cheat(env);
        const auto result = causim::run_episode(env, *cheat, 500);
        REQUIRE(result.report.cum_regret == 0.0);
        REQUIRE(result.report.accuracy == 1.0);
    }

    // Still exact when part of the context is an unobserved confounder: the
    // cheat reads the pending extended context through the oracle.
    auto spec = sine_env(17);
    spec.dims.n_observed = 1;
    spec.dims.m_domain = 2;
    Environment env(spec);
    auto cheat = causim::make_oracle_cheat(env);
    const auto result = causim::run_episode(env, *cheat, 500);
    REQUIRE(result.report.cum_regret == 0.0);
    REQUIRE(result.report.accuracy == 1.0);
}

TEST_CASE("posterior sampling beats blind play on cumulative regret", "[agents][stats]") {
    double uniform_total = 0.0;
    double thompson_total = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Environment e1(sine_env(seed));
        UniformRandomAgent u(2, seed + 100);
        uniform_total += causim::run_episode(e1, u, 2000).report.cum_regret;

        Environment e2(sine_env(seed));
        ThompsonBinnedAgent t(2, BinningScheme(unit_box(2), 4), 1.0, 1.0,
                              seed + 100);
        thompson_total += causim::run_episode(e2, t, 2000).report.cum_regret;
    }
    REQUIRE(thompson_total < uniform_total);
}
