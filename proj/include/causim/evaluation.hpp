#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "causim/environment.hpp"
#include "causim/errors.hpp"
#include "causim/grid.hpp"

namespace causim {

// Lowest index wins ties, so the all-equal case resolves to the control
// arm: never treat without strict gain.
inline std::size_t argmax_tie_low(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("argmax over empty value set");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

// True uplift of treatment arm i relative to control at a given context and
// time: b_i(x', d(t)) - b_0(x', d(t)).
inline double true_uplift(const OracleHandle& oracle,
                          std::span<const double> x_prime, std::int64_t t,
                          std::size_t arm) {
    if (arm == 0) {
        throw std::invalid_argument(
            "true_uplift: arm must be >= 1 (uplift is relative to control)");
    }
    return oracle.true_response(arm, x_prime, t)
        - oracle.true_response(0, x_prime, t);
}

inline std::size_t optimal_action(const OracleHandle& oracle,
                                  std::span<const double> x_prime,
                                  std::int64_t t) {
    const auto b = oracle.true_responses(x_prime, t);
    return argmax_tie_low(b);
}

// One scored round: what was played, what the oracle would have played, and
// the noiseless gap between them.
struct PolicyDecision {
    std::int64_t t = 0;
    std::size_t cause = 0;
    std::size_t optimal = 0;
    std::vector<double> base_values;
    double regret = 0.0; // b_optimal - b_cause, always >= 0
};

struct EpisodeReport {
    std::int64_t rounds = 0;
    double cum_regret = 0.0;
    double accuracy = 0.0; // fraction of rounds with regret exactly 0
    std::int64_t effects = 0; // realized E = 1 count
    std::int64_t window = 0;  // 0 = no trace requested
    std::vector<double> window_regret; // summed regret per window
};

inline PolicyDecision score_record(const InteractionRecord& rec) {
    if (!rec.oracle) {
        throw DataError("evaluation: record at t=" + std::to_string(rec.t)
                        + " has no oracle fields");
    }
    PolicyDecision d;
    d.t = rec.t;
    d.cause = rec.cause;
    d.base_values = rec.oracle->base_values;
    d.optimal = argmax_tie_low(d.base_values);
    d.regret = d.base_values[d.optimal] - d.base_values[d.cause];
    return d;
}

inline EpisodeReport evaluate_trajectory(
    const std::vector<InteractionRecord>& records, std::int64_t window = 0,
    std::vector<PolicyDecision>* decisions_out = nullptr) {
    EpisodeReport report;
    report.rounds = static_cast<std::int64_t>(records.size());
    report.window = window;
    std::int64_t exact = 0;
    if (decisions_out) {
        decisions_out->clear();
        decisions_out->reserve(records.size());
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        PolicyDecision d = score_record(records[i]);
        report.cum_regret += d.regret;
        if (d.regret == 0.0) {
            ++exact;
        }
        report.effects += records[i].effect;
        if (window > 0) {
            const std::size_t w = i / static_cast<std::size_t>(window);
            if (report.window_regret.size() <= w) {
                report.window_regret.resize(w + 1, 0.0);
            }
            report.window_regret[w] += d.regret;
        }
        if (decisions_out) {
            decisions_out->push_back(std::move(d));
        }
    }
    report.accuracy = records.empty()
        ? 0.0
        : static_cast<double>(exact) / static_cast<double>(records.size());
    return report;
}

// CSV export: one scored row per round plus the running total.
inline void write_report_csv(std::ostream& out,
                             const std::vector<PolicyDecision>& decisions) {
    out << "t,C,C_star,regret,cum_regret\n";
    double cum = 0.0;
    for (const auto& d : decisions) {
        cum += d.regret;
        out << d.t << ',' << d.cause << ',' << d.optimal << ','
            << format_double(d.regret) << ',' << format_double(cum) << "\n";
    }
}

} // namespace causim
