#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "causim/agents.hpp"
#include "causim/config_json.hpp"
#include "causim/environment.hpp"
#include "causim/evaluation.hpp"
#include "causim/rng.hpp"

namespace causim {

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write \"" + tmp.string() + "\"");
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for \"" + tmp.string()
                                     + "\"");
        }
    }
    std::filesystem::rename(tmp, path);
}

struct BatchOutcome {
    bool ok = true;
    std::string error;
    std::vector<std::filesystem::path> artifacts;
};

// Seed for an agent instance inside a manifest run: decorrelated across
// environment seeds and across the agent list, with the spec's own seed
// folded in so two otherwise-identical specs can be forced apart.
inline std::uint64_t manifest_agent_seed(std::uint64_t env_seed,
                                         std::size_t agent_index,
                                         std::uint64_t spec_seed) {
    return derive_seed(
        derive_seed(derive_seed(env_seed, kAgentStream), agent_index),
        spec_seed);
}

// Runs every (agent, seed) episode of the manifest and writes the artifact
// set. Layout, per agent label: seed_<s>/trajectory.csv (always),
// seed_<s>/trajectory_oracle.csv (when oracle export is on),
// seed_<s>/report.{csv,json}, and one summary.json beside the seed
// directories. Episodes cut short by the environment horizon are recorded
// as truncated, not failed. On any failure the partial outputs stay on
// disk next to a MANIFEST.partial marker naming the error.
inline BatchOutcome run_manifest(const RunManifest& m) {
    namespace fs = std::filesystem;
    BatchOutcome outcome;
    auto emit = [&outcome](const fs::path& p, const std::string& content) {
        write_file_atomic(p, content);
        outcome.artifacts.push_back(p);
    };
    try {
        fs::create_directories(m.out_dir);
        for (std::size_t ai = 0; ai < m.agents.size(); ++ai) {
            const AgentSpec& aspec = m.agents[ai];
            const fs::path agent_dir = m.out_dir / m.agent_labels[ai];
            std::vector<EpisodeReport> reports;
            for (std::uint64_t seed : m.seeds) {
                EnvironmentSpec es = m.environment;
                es.seed = seed;
                Environment env(es);
                std::unique_ptr<Agent> agent;
                if (aspec.kind == AgentKind::oracle_cheat) {
                    agent = make_oracle_cheat(env);
                } else {
                    AgentSpec seeded = aspec;
                    seeded.seed = manifest_agent_seed(seed, ai, aspec.seed);
                    agent = make_agent(seeded, es.arms, entity_box(es));
                }
                EpisodeResult result = run_episode(env, *agent, m.rounds,
                                                   m.window);

                const fs::path seed_dir =
                    agent_dir / ("seed_" + std::to_string(seed));
                fs::create_directories(seed_dir);

                std::ostringstream traj;
                write_trajectory_csv(traj, result.records,
                                     es.dims.n_observed, es.arms,
                                     es.dims.confounder_count(), false);
                emit(seed_dir / "trajectory.csv", traj.str());

                if (m.oracle_export) {
                    std::ostringstream otraj;
                    write_trajectory_csv(otraj, result.records,
                                         es.dims.n_observed, es.arms,
                                         es.dims.confounder_count(), true);
                    emit(seed_dir / "trajectory_oracle.csv", otraj.str());
                }

                std::vector<PolicyDecision> decisions;
                evaluate_trajectory(result.records, m.window, &decisions);
                std::ostringstream rep;
                write_report_csv(rep, decisions);
                emit(seed_dir / "report.csv", rep.str());
                emit(seed_dir / "report.json",
                     report_to_json(result.report, result.truncated).dump(2)
                         + "\n");

                reports.push_back(result.report);
            }
            emit(agent_dir / "summary.json",
                 summary_to_json(m.agent_labels[ai], m.seeds, m.rounds,
                                 reports)
                         .dump(2)
                     + "\n");
        }
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
        std::error_code ec;
        fs::create_directories(m.out_dir, ec);
        std::ofstream marker(m.out_dir / "MANIFEST.partial");
        marker << e.what() << "\n";
    }
    return outcome;
}

} // namespace causim
