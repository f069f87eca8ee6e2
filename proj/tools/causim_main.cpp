// Batch front door for the simulation engine: config validation, response
// surface dumps, manifest runs, and Monte-Carlo selfchecks.
//
// Exit codes: 0 ok, 2 config/argument error, 3 selfcheck failure,
// 1 runtime failure.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <causim/causim.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSelfcheck = 3;

int cmd_validate(const std::filesystem::path& config) {
    causim::EnvironmentSpec spec = causim::load_environment_spec(config);
    const auto errs = causim::validate(spec);
    if (errs.empty()) {
        std::cout << "OK\n";
        return kExitOk;
    }
    for (const auto& e : errs) {
        std::cerr << e << "\n";
    }
    return kExitConfig;
}

std::vector<std::optional<double>>
parse_fixes(const std::vector<std::string>& fixes, std::size_t m) {
    if (fixes.empty()) {
        return {};
    }
    std::vector<std::optional<double>> fixed(m);
    for (const std::string& f : fixes) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) {
            throw causim::ConfigError("--fix: expected DIM=VALUE, got \"" + f
                                      + "\"");
        }
        std::size_t pos = 0;
        unsigned long dim = 0;
        try {
            dim = std::stoul(f.substr(0, eq), &pos);
        } catch (const std::exception&) {
            throw causim::ConfigError("--fix: bad dimension in \"" + f + "\"");
        }
        if (pos != eq || dim >= m) {
            throw causim::ConfigError("--fix: dimension out of range in \"" + f
                                      + "\"");
        }
        try {
            std::size_t vpos = 0;
            const double value = std::stod(f.substr(eq + 1), &vpos);
            if (vpos != f.size() - eq - 1) {
                throw std::invalid_argument("");
            }
            fixed[dim] = value;
        } catch (const std::exception&) {
            throw causim::ConfigError("--fix: bad value in \"" + f + "\"");
        }
    }
    return fixed;
}

int cmd_surface(const std::filesystem::path& config, std::size_t arm,
                std::int64_t t, std::size_t res,
                const std::filesystem::path& out,
                const std::optional<std::filesystem::path>& svg,
                const std::vector<std::string>& fixes) {
    causim::EnvironmentSpec spec = causim::load_environment_spec(config);
    const auto errs = causim::validate(spec);
    if (!errs.empty()) {
        for (const auto& e : errs) {
            std::cerr << e << "\n";
        }
        return kExitConfig;
    }
    causim::SurfaceRequest req;
    req.arm = arm;
    req.t = t;
    req.resolution = res;
    req.fixed = parse_fixes(fixes, spec.dims.m_domain);

    const causim::SurfaceResult result = causim::compute_surface(spec, req);
    std::ostringstream csv;
    causim::write_grid_csv(result.grid, csv);
    causim::write_file_atomic(out, csv.str());
    std::cout << "wrote " << out.string() << "\n";

    if (svg) {
        causim::SurfaceRequest control = req;
        control.arm = 0;
        const causim::SurfaceResult base0 =
            causim::compute_surface(spec, control);
        std::ostringstream img;
        std::ostringstream title;
        title << "arm " << arm << " (green) vs control (red), t=" << t;
        causim::write_surface_svg(img, result, base0, title.str());
        causim::write_file_atomic(*svg, img.str());
        std::cout << "wrote " << svg->string() << "\n";
    }
    return kExitOk;
}

int cmd_run(const std::filesystem::path& manifest_path,
            const std::optional<std::filesystem::path>& out_override) {
    causim::RunManifest manifest = causim::load_run_manifest(manifest_path);
    {
        const auto errs = causim::validate(manifest.environment);
        if (!errs.empty()) {
            for (const auto& e : errs) {
                std::cerr << e << "\n";
            }
            return kExitConfig;
        }
    }
    if (out_override) {
        manifest.out_dir = *out_override;
    }
    const causim::BatchOutcome outcome = causim::run_manifest(manifest);
    if (!outcome.ok) {
        std::cerr << "run failed: " << outcome.error << "\n";
        return kExitRuntime;
    }
    for (const auto& label : manifest.agent_labels) {
        std::ifstream in(manifest.out_dir / label / "summary.json");
        causim::json summary = causim::json::parse(in);
        std::cout << label
                  << ": cum_regret_mean="
                  << causim::format_double(summary["cum_regret_mean"]
                                               .get<double>())
                  << " accuracy_mean="
                  << causim::format_double(summary["accuracy_mean"]
                                               .get<double>())
                  << "\n";
    }
    std::cout << "wrote " << outcome.artifacts.size() << " files under "
              << manifest.out_dir.string() << "\n";
    return kExitOk;
}

int cmd_selfcheck(const std::filesystem::path& config, std::int64_t draws) {
    causim::EnvironmentSpec spec = causim::load_environment_spec(config);
    const auto results = causim::run_selfcheck(spec, draws);
    bool all_ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name
                  << ": statistic=" << causim::format_double(r.statistic)
                  << " tolerance=" << causim::format_double(r.tolerance)
                  << "\n";
        all_ok = all_ok && r.passed;
    }
    if (!all_ok) {
        std::cerr << "selfcheck failed\n";
        return kExitSelfcheck;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal uplift simulation engine"};
    app.require_subcommand(1);

    std::string config;
    std::string manifest;
    std::size_t arm = 0;
    std::int64_t t = 0;
    std::size_t res = 101;
    std::string out;
    std::string svg;
    std::vector<std::string> fixes;
    std::string run_out;
    std::int64_t draws = 100000;

    CLI::App* validate = app.add_subcommand("validate", "check a config file");
    validate->add_option("config", config, "environment config (JSON)")
        ->required();

    CLI::App* surface =
        app.add_subcommand("surface", "dump a response surface lattice");
    surface->add_option("config", config, "environment config (JSON)")
        ->required();
    surface->add_option("--arm", arm, "arm index (default 0)");
    surface->add_option("--t", t, "round to evaluate the drift at (default 0)");
    surface->add_option("--res", res, "nodes per free axis (default 101)");
    surface->add_option("--out", out, "output CSV path")->required();
    surface->add_option("--svg", svg, "also render an SVG heatmap here");
    surface->add_option("--fix", fixes,
                        "pin a dimension, DIM=VALUE (repeatable)");

    CLI::App* run = app.add_subcommand("run", "execute a run manifest");
    run->add_option("manifest", manifest, "run manifest (JSON)")->required();
    run->add_option("--out", run_out, "override the manifest output directory");

    CLI::App* selfcheck =
        app.add_subcommand("selfcheck", "Monte-Carlo invariant checks");
    selfcheck->add_option("config", config, "environment config (JSON)")
        ->required();
    selfcheck->add_option("--draws", draws,
                          "samples per check (default 100000, min 10000)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(config);
        }
        if (surface->parsed()) {
            return cmd_surface(config, arm, t, res, out,
                               svg.empty()
                                   ? std::nullopt
                                   : std::optional<std::filesystem::path>(svg),
                               fixes);
        }
        if (run->parsed()) {
            return cmd_run(manifest,
                           run_out.empty()
                               ? std::nullopt
                               : std::optional<std::filesystem::path>(run_out));
        }
        if (selfcheck->parsed()) {
            return cmd_selfcheck(config, draws);
        }
    } catch (const causim::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const causim::DataError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
