#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <vector>

#include <causim/evaluation.hpp>

using causim::DistKind;
using causim::Environment;
using causim::EnvironmentSpec;
using causim::InteractionRecord;
using causim::OracleFields;
using causim::OracleHandle;
using causim::SineBaseSpec;
using Catch::Matchers::WithinAbs;

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
    return spec;
}

InteractionRecord scored(std::int64_t t, std::size_t cause, int effect,
                         std::vector<double> base_values) {
    InteractionRecord rec;
    rec.t = t;
    rec.cause = cause;
    rec.effect = effect;
    rec.oracle = OracleFields{{}, 0.0, std::move(base_values), 0.0};
    return rec;
}

} // namespace

TEST_CASE("argmax breaks ties toward the control arm", "[evaluation]") {
    REQUIRE(causim::argmax_tie_low(std::vector<double>{0.2, 0.9, 0.4}) == 1);
    REQUIRE(causim::argmax_tie_low(std::vector<double>{0.5, 0.5, 0.5}) == 0);
    REQUIRE(causim::argmax_tie_low(std::vector<double>{0.3, 0.7, 0.7}) == 1);
    REQUIRE(causim::argmax_tie_low(std::vector<double>{0.8}) == 0);
    REQUIRE_THROWS_AS(causim::argmax_tie_low(std::vector<double>{}),
                      std::invalid_argument);
}

TEST_CASE("uplift is the treated-minus-control response gap", "[evaluation]") {
    Environment env(sine_env(42));
    OracleHandle oracle(env);
    const std::vector<double> origin{0.0, 0.0};

    // b_1(origin) = 0.5 exactly; b_0(origin) = (sin(0.98)+1)/2.
    const double u = causim::true_uplift(oracle, origin, 0, 1);
    REQUIRE_THAT(u, WithinAbs(0.5 - 0.91524868524598523, 1e-12));
    REQUIRE(u == 0.5 - oracle.true_response(0, origin, 0));

    // Antisymmetry of the defining subtraction at arbitrary points.
    causim::RngStream rng(3);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double b0 = oracle.true_response(0, x, 5);
        const double b1 = oracle.true_response(1, x, 5);
        REQUIRE(causim::true_uplift(oracle, x, 5, 1) == b1 - b0);
    }

    REQUIRE_THROWS_AS(causim::true_uplift(oracle, origin, 0, 0),
                      std::invalid_argument);
}

TEST_CASE("optimal action maximizes the noiseless response", "[evaluation]") {
    Environment env(sine_env(42));
    OracleHandle oracle(env);
    const std::vector<double> origin{0.0, 0.0};
    // b_0 = 0.915... > b_1 = 0.5: control is optimal at the origin.
    REQUIRE(causim::optimal_action(oracle, origin, 0) == 0);

    causim::RngStream rng(8);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const auto b = oracle.true_responses(x, 3);
        const auto opt = causim::optimal_action(oracle, x, 3);
        for (std::size_t arm = 0; arm < b.size(); ++arm) {
            REQUIRE(b[opt] >= b[arm]);
        }
    }
}

TEST_CASE("scoring one record yields its noiseless regret", "[evaluation]") {
    const auto rec = scored(4, 1, 1, {0.7, 0.4});
    const auto d = causim::score_record(rec);
    REQUIRE(d.t == 4);
    REQUIRE(d.cause == 1);
    REQUIRE(d.optimal == 0);
    REQUIRE_THAT(d.regret, WithinAbs(0.3, 1e-15));

    const auto best = causim::score_record(scored(5, 0, 0, {0.7, 0.4}));
    REQUIRE(best.regret == 0.0);

    InteractionRecord bare;
    bare.t = 9;
    REQUIRE_THROWS_AS(causim::score_record(bare), causim::DataError);
}

TEST_CASE("trajectory evaluation accumulates regret and accuracy", "[evaluation]") {
    std::vector<InteractionRecord> records;
    records.push_back(scored(0, 0, 1, {0.6, 0.2})); // optimal, regret 0
    records.push_back(scored(1, 1, 0, {0.6, 0.2})); // regret 0.4
    records.push_back(scored(2, 1, 1, {0.1, 0.9})); // optimal, regret 0
    records.push_back(scored(3, 0, 1, {0.1, 0.9})); // regret 0.8

    std::vector<causim::PolicyDecision> decisions;
    const auto report = causim::evaluate_trajectory(records, 2, &decisions);
    REQUIRE(report.rounds == 4);
    REQUIRE_THAT(report.cum_regret, WithinAbs(1.2, 1e-12));
    REQUIRE(report.accuracy == 0.5);
    REQUIRE(report.effects == 3);
    REQUIRE(report.window == 2);
    REQUIRE(report.window_regret.size() == 2);
    REQUIRE_THAT(report.window_regret[0], WithinAbs(0.4, 1e-12));
    REQUIRE_THAT(report.window_regret[1], WithinAbs(0.8, 1e-12));
    REQUIRE(decisions.size() == 4);
    REQUIRE(decisions[1].optimal == 0);

    // Odd-length trailing window is kept, partially filled.
    records.push_back(scored(4, 1, 0, {0.5, 0.2}));
    const auto odd = causim::evaluate_trajectory(records, 2);
    REQUIRE(odd.window_regret.size() == 3);
    REQUIRE_THAT(odd.window_regret[2], WithinAbs(0.3, 1e-12));

    const auto empty = causim::evaluate_trajectory({});
    REQUIRE(empty.rounds == 0);
    REQUIRE(empty.accuracy == 0.0);
    REQUIRE(empty.window_regret.empty());
}

TEST_CASE("regret is zero exactly when the played arm was optimal", "[evaluation]") {
    auto spec = sine_env(123);
    spec.noise.enabled = true;
    Environment env(spec);
    OracleHandle oracle(env);
    causim::RngStream actions(77);
    std::vector<InteractionRecord> records;
    for (int i = 0; i < 200; ++i) {
        env.interact(actions.uniform_index(2));
        records.push_back(oracle.last_record());
    }
    const auto report = causim::evaluate_trajectory(records);
    std::vector<causim::PolicyDecision> decisions;
    causim::evaluate_trajectory(records, 0, &decisions);
    for (const auto& d : decisions) {
        REQUIRE(d.regret >= 0.0);
        if (d.cause == d.optimal) {
            REQUIRE(d.regret == 0.0);
        } else {
            REQUIRE(d.regret > 0.0);
        }
    }
    REQUIRE(report.cum_regret >= 0.0);
}

TEST_CASE("report CSV carries the running total", "[evaluation]") {
    std::vector<InteractionRecord> records;
    records.push_back(scored(0, 1, 1, {0.5, 0.25}));
    records.push_back(scored(1, 0, 0, {0.5, 0.25}));
    std::vector<causim::PolicyDecision> decisions;
    causim::evaluate_trajectory(records, 0, &decisions);

    std::ostringstream out;
    causim::write_report_csv(out, decisions);
    REQUIRE(out.str()
            == "t,C,C_star,regret,cum_regret\n"
               "0,1,0,0.25,0.25\n"
               "1,0,0,0,0.25\n");
}
