#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "causim/agents.hpp"
#include "causim/environment.hpp"
#include "causim/errors.hpp"
#include "causim/evaluation.hpp"

namespace causim {

using json = nlohmann::json;

inline constexpr const char* kEnvSchema = "causim-env/1";
inline constexpr const char* kRunSchema = "causim-run/1";

// A fully resolved batch job: the environment config it points at, the
// agents to run, and where the artifact set goes.
struct RunManifest {
    std::filesystem::path config_path;
    EnvironmentSpec environment;
    std::vector<AgentSpec> agents;
    std::vector<std::string> agent_labels;
    std::int64_t rounds = 0;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path out_dir;
    bool oracle_export = false;
    std::int64_t window = 0;
};

namespace cfg {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

inline void check_object(const json& j, const std::string& path) {
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    check_object(j, path);
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            fail(path + "." + item.key(), "unknown key");
        }
    }
}

inline const json& require(const json& j, const char* key,
                           const std::string& path) {
    check_object(j, path);
    auto it = j.find(key);
    if (it == j.end()) {
        fail(path + "." + key, "missing required key");
    }
    return *it;
}

inline const json* optional_key(const json& j, const char* key) {
    if (!j.is_object()) {
        return nullptr;
    }
    auto it = j.find(key);
    return (it == j.end() || it->is_null()) ? nullptr : &*it;
}

inline double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) {
        fail(path, "expected a number");
    }
    return j.get<double>();
}

inline bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) {
        fail(path, "expected true or false");
    }
    return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        fail(path, "expected a string");
    }
    return j.get<std::string>();
}

inline std::uint64_t as_u64(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) {
        fail(path, "expected a non-negative integer");
    }
    if (j.is_number_integer() && j.get<std::int64_t>() < 0) {
        fail(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

inline std::int64_t as_i64(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) {
        fail(path, "expected an integer");
    }
    return j.get<std::int64_t>();
}

inline std::vector<double> as_double_vec(const json& j,
                                         const std::string& path) {
    if (!j.is_array()) {
        fail(path, "expected an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline CoordinateDistribution parse_distribution(const json& j,
                                                 const std::string& path) {
    check_keys(j, path, {"dist", "low", "high", "mean", "stddev"});
    CoordinateDistribution d;
    const std::string kind = as_string(require(j, "dist", path), path + ".dist");
    if (kind == "uniform") {
        d.kind = DistKind::uniform;
    } else if (kind == "gaussian") {
        d.kind = DistKind::gaussian;
    } else {
        fail(path + ".dist", "expected \"uniform\" or \"gaussian\"");
    }
    if (const json* v = optional_key(j, "low")) d.low = as_double(*v, path + ".low");
    if (const json* v = optional_key(j, "high")) d.high = as_double(*v, path + ".high");
    if (const json* v = optional_key(j, "mean")) d.mean = as_double(*v, path + ".mean");
    if (const json* v = optional_key(j, "stddev"))
        d.stddev = as_double(*v, path + ".stddev");
    return d;
}

inline DriftSpec parse_drift(const json& j, const std::string& path) {
    check_object(j, path);
    DriftSpec d;
    const std::string kind = as_string(require(j, "kind", path), path + ".kind");
    if (kind == "constant") {
        check_keys(j, path, {"kind", "level"});
        d.kind = DriftKind::constant;
        d.level = as_double(require(j, "level", path), path + ".level");
    } else if (kind == "linear") {
        check_keys(j, path, {"kind", "intercept", "slope"});
        d.kind = DriftKind::linear;
        d.intercept = as_double(require(j, "intercept", path), path + ".intercept");
        d.slope = as_double(require(j, "slope", path), path + ".slope");
    } else if (kind == "sinusoidal") {
        check_keys(j, path, {"kind", "amplitude", "omega", "phase"});
        d.kind = DriftKind::sinusoidal;
        d.amplitude = as_double(require(j, "amplitude", path), path + ".amplitude");
        d.omega = as_double(require(j, "omega", path), path + ".omega");
        if (const json* v = optional_key(j, "phase"))
            d.phase = as_double(*v, path + ".phase");
    } else if (kind == "step") {
        check_keys(j, path, {"kind", "initial", "changes"});
        d.kind = DriftKind::step;
        d.initial = as_double(require(j, "initial", path), path + ".initial");
        const json& ch = require(j, "changes", path);
        if (!ch.is_array()) {
            fail(path + ".changes", "expected an array");
        }
        for (std::size_t i = 0; i < ch.size(); ++i) {
            const std::string cp = path + ".changes[" + std::to_string(i) + "]";
            check_keys(ch[i], cp, {"at", "level"});
            DriftChangePoint pt;
            pt.at = as_i64(require(ch[i], "at", cp), cp + ".at");
            pt.level = as_double(require(ch[i], "level", cp), cp + ".level");
            d.changes.push_back(pt);
        }
    } else if (kind == "random-walk") {
        check_keys(j, path, {"kind", "initial", "step_scale", "seed"});
        d.kind = DriftKind::random_walk;
        d.initial = as_double(require(j, "initial", path), path + ".initial");
        d.step_scale =
            as_double(require(j, "step_scale", path), path + ".step_scale");
        if (const json* v = optional_key(j, "seed"))
            d.seed = as_u64(*v, path + ".seed");
    } else {
        fail(path + ".kind", "unknown drift kind \"" + kind + "\"");
    }
    return d;
}

inline NoiseSpec parse_noise(const json& j, const std::string& path) {
    check_keys(j, path, {"enabled", "beta", "scale"});
    NoiseSpec n;
    if (const json* v = optional_key(j, "enabled"))
        n.enabled = as_bool(*v, path + ".enabled");
    if (const json* v = optional_key(j, "beta"))
        n.beta = as_double(*v, path + ".beta");
    if (const json* v = optional_key(j, "scale"))
        n.scale = as_double(*v, path + ".scale");
    return n;
}

inline BaseSpec parse_base(const json& j, const std::string& path,
                           const std::filesystem::path& base_dir);

inline MixtureBaseSpec parse_mixture(const json& j, const std::string& path,
                                     const std::filesystem::path& base_dir) {
    MixtureBaseSpec m;
    const json& arms = require(j, "arms", path);
    if (!arms.is_array()) {
        fail(path + ".arms", "expected an array (one component list per arm)");
    }
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const std::string ap = path + ".arms[" + std::to_string(i) + "]";
        if (!arms[i].is_array()) {
            fail(ap, "expected an array of components");
        }
        std::vector<MixtureComponent> comps;
        for (std::size_t c = 0; c < arms[i].size(); ++c) {
            const std::string cp = ap + "[" + std::to_string(c) + "]";
            check_keys(arms[i][c], cp, {"weight", "base"});
            MixtureComponent comp;
            comp.weight =
                as_double(require(arms[i][c], "weight", cp), cp + ".weight");
            comp.base = std::make_shared<const BaseSpec>(
                parse_base(require(arms[i][c], "base", cp), cp + ".base",
                           base_dir));
            comps.push_back(std::move(comp));
        }
        m.per_arm.push_back(std::move(comps));
    }
    return m;
}

inline BaseSpec parse_base(const json& j, const std::string& path,
                           const std::filesystem::path& base_dir) {
    check_object(j, path);
    const std::string kind = as_string(require(j, "kind", path), path + ".kind");
    if (kind == "sine") {
        check_keys(j, path, {"kind", "lambda", "g", "g_per_arm"});
        SineBaseSpec s;
        const json& lam = require(j, "lambda", path);
        if (!lam.is_array()) {
            fail(path + ".lambda", "expected an array of integers");
        }
        for (std::size_t i = 0; i < lam.size(); ++i) {
            const std::string lp = path + ".lambda[" + std::to_string(i) + "]";
            s.lambda.push_back(static_cast<int>(as_i64(lam[i], lp)));
        }
        s.g = as_double_vec(require(j, "g", path), path + ".g");
        if (const json* v = optional_key(j, "g_per_arm")) {
            if (!v->is_array()) {
                fail(path + ".g_per_arm", "expected an array of arrays");
            }
            std::vector<std::vector<double>> per;
            for (std::size_t i = 0; i < v->size(); ++i) {
                per.push_back(as_double_vec(
                    (*v)[i], path + ".g_per_arm[" + std::to_string(i) + "]"));
            }
            s.g_per_arm = std::move(per);
        }
        return BaseSpec{std::move(s)};
    }
    if (kind == "polynomial") {
        check_keys(j, path, {"kind", "q", "k", "h", "selector_seed"});
        PolyBaseSpec s;
        s.q = as_u64(require(j, "q", path), path + ".q");
        const json& k = require(j, "k", path);
        if (!k.is_array()) {
            fail(path + ".k", "expected an array of coefficient arrays");
        }
        for (std::size_t i = 0; i < k.size(); ++i) {
            s.k.push_back(
                as_double_vec(k[i], path + ".k[" + std::to_string(i) + "]"));
        }
        const json& h = require(j, "h", path);
        if (!h.is_array() || h.size() != 2) {
            fail(path + ".h", "expected [low, high]");
        }
        s.h_low = as_double(h[0], path + ".h[0]");
        s.h_high = as_double(h[1], path + ".h[1]");
        if (const json* v = optional_key(j, "selector_seed"))
            s.selector_seed = as_u64(*v, path + ".selector_seed");
        return BaseSpec{std::move(s)};
    }
    if (kind == "tabulated") {
        check_keys(j, path, {"kind", "grids"});
        TabulatedBaseSpec s;
        const json& grids = require(j, "grids", path);
        if (!grids.is_array() || grids.empty()) {
            fail(path + ".grids", "expected a non-empty array of CSV paths");
        }
        for (std::size_t i = 0; i < grids.size(); ++i) {
            const std::string gp = path + ".grids[" + std::to_string(i) + "]";
            const std::filesystem::path file =
                base_dir / as_string(grids[i], gp);
            std::ifstream in(file);
            if (!in) {
                fail(gp, "cannot open \"" + file.string() + "\"");
            }
            try {
                s.per_arm.push_back(read_grid_csv(in));
            } catch (const DataError& e) {
                fail(gp, std::string(e.what()) + " in \"" + file.string() + "\"");
            }
        }
        return BaseSpec{std::move(s)};
    }
    if (kind == "mixture") {
        check_keys(j, path, {"kind", "arms"});
        return BaseSpec{parse_mixture(j, path, base_dir)};
    }
    fail(path + ".kind", "unknown base kind \"" + kind + "\"");
}

} // namespace cfg

inline json load_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open \"" + file.string() + "\"");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("\"" + file.string() + "\": " + e.what());
    }
}

inline EnvironmentSpec
parse_environment_spec(const json& j, const std::filesystem::path& base_dir) {
    cfg::check_keys(j, "config",
                    {"schema", "seed", "arms", "N", "M", "horizon", "entity",
                     "active_mask", "confounders", "base", "drift", "noise"});
    const std::string schema =
        cfg::as_string(cfg::require(j, "schema", "config"), "schema");
    if (schema != kEnvSchema) {
        cfg::fail("schema", "expected \"" + std::string(kEnvSchema) + "\"");
    }
    EnvironmentSpec spec;
    spec.seed = cfg::as_u64(cfg::require(j, "seed", "config"), "seed");
    spec.dims.n_observed = cfg::as_u64(cfg::require(j, "N", "config"), "N");
    spec.dims.m_domain = cfg::as_u64(cfg::require(j, "M", "config"), "M");
    if (const json* v = cfg::optional_key(j, "horizon")) {
        spec.horizon = cfg::as_i64(*v, "horizon");
    }
    if (const json* v = cfg::optional_key(j, "entity")) {
        spec.entity_dist = cfg::parse_distribution(*v, "entity");
    }
    if (const json* v = cfg::optional_key(j, "active_mask")) {
        if (!v->is_array()) {
            cfg::fail("active_mask", "expected an array of indices");
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            spec.dims.active_mask.push_back(cfg::as_u64(
                (*v)[i], "active_mask[" + std::to_string(i) + "]"));
        }
    }
    if (const json* v = cfg::optional_key(j, "confounders")) {
        cfg::check_keys(*v, "confounders",
                        {"dist", "low", "high", "mean", "stddev", "persistence"});
        json dist_only = *v;
        dist_only.erase("persistence");
        spec.dims.confounder_dist =
            cfg::parse_distribution(dist_only, "confounders");
        if (const json* p = cfg::optional_key(*v, "persistence")) {
            const std::string s =
                cfg::as_string(*p, "confounders.persistence");
            if (s == "per-interaction") {
                spec.dims.persistence = ConfounderPersistence::per_interaction;
            } else if (s == "per-entity") {
                spec.dims.persistence = ConfounderPersistence::per_entity;
            } else {
                cfg::fail("confounders.persistence",
                          "expected \"per-interaction\" or \"per-entity\"");
            }
        }
    }
    spec.base = cfg::parse_base(cfg::require(j, "base", "config"), "base",
                                base_dir);
    spec.arms = spec_arm_count(spec.base);
    if (const json* v = cfg::optional_key(j, "arms")) {
        const std::uint64_t declared = cfg::as_u64(*v, "arms");
        if (declared != spec.arms) {
            cfg::fail("arms", "declared " + std::to_string(declared)
                                  + " but base describes "
                                  + std::to_string(spec.arms));
        }
    }
    if (const json* v = cfg::optional_key(j, "drift")) {
        spec.drift = cfg::parse_drift(*v, "drift");
    }
    if (const json* v = cfg::optional_key(j, "noise")) {
        spec.noise = cfg::parse_noise(*v, "noise");
    }
    return spec;
}

inline EnvironmentSpec
load_environment_spec(const std::filesystem::path& file) {
    return parse_environment_spec(load_json_file(file),
                                  file.parent_path());
}

inline AgentSpec parse_agent_spec(const json& j, const std::string& path) {
    cfg::check_keys(j, path,
                    {"kind", "fixed", "epsilon", "bins", "prior_alpha",
                     "prior_beta", "seed"});
    AgentSpec spec;
    const std::string kind =
        cfg::as_string(cfg::require(j, "kind", path), path + ".kind");
    const auto parsed = parse_agent_kind(kind);
    if (!parsed) {
        cfg::fail(path + ".kind", "unknown agent kind \"" + kind + "\"");
    }
    spec.kind = *parsed;
    if (spec.kind == AgentKind::fixed_arm) {
        spec.fixed = cfg::as_u64(cfg::require(j, "fixed", path), path + ".fixed");
    }
    if (const json* v = cfg::optional_key(j, "epsilon"))
        spec.epsilon = cfg::as_double(*v, path + ".epsilon");
    if (const json* v = cfg::optional_key(j, "bins"))
        spec.bins = cfg::as_u64(*v, path + ".bins");
    if (const json* v = cfg::optional_key(j, "prior_alpha"))
        spec.prior_alpha = cfg::as_double(*v, path + ".prior_alpha");
    if (const json* v = cfg::optional_key(j, "prior_beta"))
        spec.prior_beta = cfg::as_double(*v, path + ".prior_beta");
    if (const json* v = cfg::optional_key(j, "seed"))
        spec.seed = cfg::as_u64(*v, path + ".seed");
    return spec;
}

inline RunManifest load_run_manifest(const std::filesystem::path& file) {
    const json j = load_json_file(file);
    cfg::check_keys(j, "manifest",
                    {"schema", "config", "agents", "rounds", "seeds",
                     "out_dir", "oracle_export", "window"});
    const std::string schema =
        cfg::as_string(cfg::require(j, "schema", "manifest"), "schema");
    if (schema != kRunSchema) {
        cfg::fail("schema", "expected \"" + std::string(kRunSchema) + "\"");
    }
    RunManifest m;
    const std::filesystem::path base_dir = file.parent_path();
    m.config_path = base_dir
        / cfg::as_string(cfg::require(j, "config", "manifest"), "config");
    m.environment = load_environment_spec(m.config_path);

    const json& agents = cfg::require(j, "agents", "manifest");
    if (!agents.is_array() || agents.empty()) {
        cfg::fail("agents", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string ap = "agents[" + std::to_string(i) + "]";
        AgentSpec spec = parse_agent_spec(agents[i], ap);
        auto errs = validate(spec, m.environment.arms, ap);
        if (!errs.empty()) {
            throw ConfigError(errs.front());
        }
        m.agent_labels.push_back("agent" + std::to_string(i) + "_"
                                 + agent_kind_name(spec.kind));
        m.agents.push_back(std::move(spec));
    }

    m.rounds = cfg::as_i64(cfg::require(j, "rounds", "manifest"), "rounds");
    if (m.rounds < 1) {
        cfg::fail("rounds", "must be >= 1");
    }
    const json& seeds = cfg::require(j, "seeds", "manifest");
    if (!seeds.is_array() || seeds.empty()) {
        cfg::fail("seeds", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        m.seeds.push_back(
            cfg::as_u64(seeds[i], "seeds[" + std::to_string(i) + "]"));
    }
    m.out_dir = base_dir
        / cfg::as_string(cfg::require(j, "out_dir", "manifest"), "out_dir");
    if (const json* v = cfg::optional_key(j, "oracle_export"))
        m.oracle_export = cfg::as_bool(*v, "oracle_export");
    if (const json* v = cfg::optional_key(j, "window")) {
        m.window = cfg::as_i64(*v, "window");
        if (m.window < 0) {
            cfg::fail("window", "must be >= 0");
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// JSON exports
// ---------------------------------------------------------------------------

inline json report_to_json(const EpisodeReport& report, bool truncated) {
    json j;
    j["rounds"] = report.rounds;
    j["cum_regret"] = report.cum_regret;
    j["accuracy"] = report.accuracy;
    j["effects"] = report.effects;
    j["truncated"] = truncated;
    if (report.window > 0) {
        j["window"] = report.window;
        j["window_regret"] = report.window_regret;
    }
    return j;
}

inline json summary_to_json(const std::string& agent_label,
                            const std::vector<std::uint64_t>& seeds,
                            std::int64_t rounds,
                            const std::vector<EpisodeReport>& reports) {
    double regret_mean = 0.0;
    double accuracy_mean = 0.0;
    for (const auto& r : reports) {
        regret_mean += r.cum_regret;
        accuracy_mean += r.accuracy;
    }
    const double n = static_cast<double>(reports.size());
    regret_mean /= n;
    accuracy_mean /= n;
    double var = 0.0;
    for (const auto& r : reports) {
        const double d = r.cum_regret - regret_mean;
        var += d * d;
    }
    json j;
    j["agent"] = agent_label;
    j["seeds"] = seeds;
    j["rounds"] = rounds;
    j["cum_regret_mean"] = regret_mean;
    j["cum_regret_std"] = std::sqrt(var / n);
    j["accuracy_mean"] = accuracy_mean;
    return j;
}

inline json snapshot_to_json(const AgentSnapshot& snap) {
    json j;
    j["kind"] = snap.kind;
    j["arms"] = snap.arms;
    j["rounds_seen"] = snap.rounds_seen;
    if (!snap.box.empty()) {
        json box = json::array();
        for (const Interval& iv : snap.box) {
            box.push_back(json::array({iv.lo, iv.hi}));
        }
        j["box"] = std::move(box);
        j["bins_per_axis"] = snap.bins_per_axis;
        j["successes"] = snap.successes;
        j["failures"] = snap.failures;
    }
    return j;
}

} // namespace causim
