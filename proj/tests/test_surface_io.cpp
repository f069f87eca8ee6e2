#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <causim/grid.hpp>
#include <causim/surface.hpp>

using causim::DistKind;
using causim::EnvironmentSpec;
using causim::Grid;
using causim::RngStream;
using causim::SineBaseSpec;
using causim::SurfaceRequest;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

EnvironmentSpec sine_env(std::size_t m = 2) {
    EnvironmentSpec spec;
    spec.arms = 2;
    spec.dims.n_observed = m;
    spec.dims.m_domain = m;
    spec.entity_dist.kind = DistKind::uniform;
    SineBaseSpec base;
    base.lambda = {2, 1};
    base.g.assign(m, 0.7);
    spec.base.v = base;
    return spec;
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = hay.find(needle); at != std::string::npos;
         at = hay.find(needle, at + needle.size())) {
        ++n;
    }
    return n;
}

} // namespace

TEST_CASE("format_double emits the shortest exact decimal", "[grid]") {
    REQUIRE(causim::format_double(0.5) == "0.5");
    REQUIRE(causim::format_double(0.1) == "0.1");
    REQUIRE(causim::format_double(-1.0) == "-1");
    REQUIRE(causim::format_double(0.0) == "0");
    // Shortest means fewest significant digits, so %g may pick scientific
    // notation: two digits round-trip 4200 and "4.2e+03" is what %.2g emits.
    REQUIRE(causim::format_double(4200.0) == "4.2e+03");

    RngStream rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-6.0, 6.0));
        const std::string s = causim::format_double(v);
        REQUIRE(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("interpolation reads back node values exactly", "[grid]") {
    Grid g;
    g.shape = {101};
    g.lo = {-1.0};
    g.hi = {1.0};
    g.values.resize(101);
    RngStream rng(9);
    for (auto& v : g.values) {
        v = rng.uniform();
    }
    for (std::size_t i = 0; i < 101; ++i) {
        const double x = g.node_coord(0, i);
        REQUIRE(g.interpolate(std::vector<double>{x}) == g.values[i]);
    }
    // Between nodes the value is the linear blend.
    const double mid = 0.5 * (g.node_coord(0, 3) + g.node_coord(0, 4));
    REQUIRE_THAT(g.interpolate(std::vector<double>{mid}),
                 WithinAbs(0.5 * (g.values[3] + g.values[4]), 1e-12));
    // Clamped at the hull.
    REQUIRE(g.interpolate(std::vector<double>{-2.0}) == g.values.front());
    REQUIRE(g.interpolate(std::vector<double>{2.0}) == g.values.back());
    REQUIRE_THROWS_AS(g.interpolate(std::vector<double>{0.0, 0.0}),
                      causim::ConfigError);
}

TEST_CASE("grid validation", "[grid]") {
    Grid g;
    auto errs = causim::validate(g, "grid");
    REQUIRE(errs.size() == 1);
    REQUIRE_THAT(errs[0], ContainsSubstring("at least one dimension"));

    g.shape = {2, 1};
    g.lo = {0.0, 0.5};
    g.hi = {1.0, 0.5};
    g.values = {0.1, 0.2};
    REQUIRE(causim::validate(g, "grid").empty());

    g.hi[1] = 0.6; // single-node axis must have lo == hi
    errs = causim::validate(g, "grid");
    REQUIRE(errs.size() == 1);
    REQUIRE_THAT(errs[0], ContainsSubstring("single-node"));

    g.hi[1] = 0.5;
    g.values.pop_back();
    errs = causim::validate(g, "grid");
    REQUIRE_THAT(errs[0], ContainsSubstring("expected 2 entries"));
}

TEST_CASE("grid CSV writes the documented layout", "[grid]") {
    Grid g;
    g.shape = {2, 2};
    g.lo = {-1.0, -1.0};
    g.hi = {1.0, 1.0};
    g.values = {0.1, 0.2, 0.3, 0.4};

    std::ostringstream out;
    causim::write_grid_csv(g, out);
    REQUIRE(out.str()
            == "dim_0,dim_1,value\n"
               "-1,-1,0.1\n"
               "-1,1,0.2\n"
               "1,-1,0.3\n"
               "1,1,0.4\n");
}

TEST_CASE("grid CSV round-trips bit-exactly", "[grid]") {
    Grid g;
    g.shape = {3, 4};
    g.lo = {-1.0, 0.0};
    g.hi = {1.0, 2.5};
    g.values.resize(12);
    RngStream rng(77);
    for (auto& v : g.values) {
        v = rng.uniform();
    }

    std::ostringstream out;
    causim::write_grid_csv(g, out);
    std::istringstream in(out.str());
    const Grid back = causim::read_grid_csv(in);

    REQUIRE(back.shape == g.shape);
    REQUIRE(back.lo == g.lo);
    REQUIRE(back.hi == g.hi);
    REQUIRE(back.values == g.values);
}

TEST_CASE("grid CSV rows may arrive in any order", "[grid]") {
    std::istringstream in(
        "dim_0,dim_1,value\n"
        "1,1,0.4\n"
        "-1,1,0.2\n"
        "1,-1,0.3\n"
        "-1,-1,0.1\n");
    const Grid g = causim::read_grid_csv(in);
    REQUIRE(g.shape == std::vector<std::size_t>{2, 2});
    REQUIRE(g.values == std::vector<double>{0.1, 0.2, 0.3, 0.4});
}

TEST_CASE("grid CSV rejects malformed input", "[grid]") {
    auto read = [](const std::string& text) {
        std::istringstream in(text);
        return causim::read_grid_csv(in);
    };

    REQUIRE_THROWS_AS(read(""), causim::DataError);
    REQUIRE_THROWS_WITH(read("x,value\n0,0.5\n"),
                        ContainsSubstring("header"));
    REQUIRE_THROWS_WITH(read("dim_0,value\n0\n"),
                        ContainsSubstring("expected 2 columns"));
    REQUIRE_THROWS_WITH(read("dim_0,value\n0,abc\n"),
                        ContainsSubstring("not a number"));
    REQUIRE_THROWS_WITH(read("dim_0,value\n0,0.1\n0.4,0.2\n1,0.3\n"),
                        ContainsSubstring("not a regular lattice"));
    // Right row count for a 2x2 lattice, but (0,0) appears twice and (0,1)
    // never does; only the repeat is detectable.
    REQUIRE_THROWS_WITH(
        read("dim_0,dim_1,value\n0,0,0.1\n0,0,0.2\n1,0,0.3\n1,1,0.4\n"),
        ContainsSubstring("duplicate"));
    // 2x2 lattice with only 3 of the 4 nodes present.
    REQUIRE_THROWS_WITH(read("dim_0,dim_1,value\n0,0,0.1\n0,1,0.2\n1,0,0.3\n"),
                        ContainsSubstring("full lattice"));
}

TEST_CASE("surface sweeps sample the noiseless response", "[surface]") {
    const auto spec = sine_env();
    SurfaceRequest req;
    req.arm = 1;
    req.t = 0;
    req.resolution = 5;
    const auto result = causim::compute_surface(spec, req);

    REQUIRE(result.free_dims == std::vector<std::size_t>{0, 1});
    REQUIRE(result.grid.shape == std::vector<std::size_t>{5, 5});
    REQUIRE(result.grid.lo == std::vector<double>{-1.0, -1.0});
    REQUIRE(result.grid.hi == std::vector<double>{1.0, 1.0});

    // Arm 1 carries no displacement: b_1 = (sin(x0 * x1) + 1) / 2.
    std::size_t flat = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j, ++flat) {
            const double x0 = result.grid.node_coord(0, i);
            const double x1 = result.grid.node_coord(1, j);
            REQUIRE_THAT(result.grid.values[flat],
                         WithinAbs(0.5 * (std::sin(x0 * x1) + 1.0), 1e-14));
        }
    }
}

TEST_CASE("surface slicing pins dimensions and keeps the rest", "[surface]") {
    const auto spec = sine_env(3);
    SurfaceRequest req;
    req.arm = 0;
    req.resolution = 4;
    req.fixed = {std::nullopt, 0.25, std::nullopt};
    const auto result = causim::compute_surface(spec, req);

    REQUIRE(result.free_dims == std::vector<std::size_t>{0, 2});
    REQUIRE(result.grid.dims() == 2);

    const auto base = causim::CompiledBase::compile(spec.base, 2, 3);
    std::size_t flat = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j, ++flat) {
            const std::vector<double> x{result.grid.node_coord(0, i), 0.25,
                                        result.grid.node_coord(1, j)};
            REQUIRE(result.grid.values[flat] == base.eval(0, x, 0.0));
        }
    }
}

TEST_CASE("surface domain covers confounder axes", "[surface]") {
    auto spec = sine_env();
    spec.dims.n_observed = 1; // dimension 1 becomes a gaussian confounder
    SurfaceRequest req;
    req.resolution = 3;
    const auto result = causim::compute_surface(spec, req);
    REQUIRE(result.grid.lo == std::vector<double>{-1.0, -3.0});
    REQUIRE(result.grid.hi == std::vector<double>{1.0, 3.0});
}

TEST_CASE("surfaces move with the drift time", "[surface]") {
    auto spec = sine_env();
    spec.drift.kind = causim::DriftKind::sinusoidal;
    spec.drift.amplitude = 2.0;
    spec.drift.omega = 0.003;

    SurfaceRequest early;
    early.resolution = 11;
    SurfaceRequest late = early;
    late.t = 1000;

    const auto a = causim::compute_surface(spec, early);
    const auto b = causim::compute_surface(spec, late);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.grid.values.size(); ++i) {
        max_diff = std::max(max_diff,
                            std::abs(a.grid.values[i] - b.grid.values[i]));
    }
    REQUIRE(max_diff > 0.01);
}

TEST_CASE("surface requests are checked", "[surface]") {
    const auto spec = sine_env();
    SurfaceRequest req;

    req.resolution = 1;
    REQUIRE_THROWS_WITH(causim::compute_surface(spec, req),
                        ContainsSubstring("resolution"));

    req.resolution = 5;
    req.arm = 2;
    REQUIRE_THROWS_WITH(causim::compute_surface(spec, req),
                        ContainsSubstring("arm"));

    req.arm = 0;
    req.fixed = {0.5};
    REQUIRE_THROWS_WITH(causim::compute_surface(spec, req),
                        ContainsSubstring("fixed"));

    req.fixed = {0.5, 0.5};
    REQUIRE_THROWS_WITH(causim::compute_surface(spec, req),
                        ContainsSubstring("at least one dimension"));
}

TEST_CASE("surface SVG renders one cell per node", "[surface]") {
    const auto spec = sine_env();
    SurfaceRequest treated;
    treated.arm = 1;
    treated.resolution = 8;
    SurfaceRequest control = treated;
    control.arm = 0;

    const auto tr = causim::compute_surface(spec, treated);
    const auto cr = causim::compute_surface(spec, control);
    std::ostringstream svg;
    causim::write_surface_svg(svg, tr, cr, "arm 1 (green) vs control (red), t=0");
    const std::string s = svg.str();

    REQUIRE_THAT(s, Catch::Matchers::StartsWith("<svg"));
    REQUIRE_THAT(s, ContainsSubstring("arm 1 (green) vs control (red), t=0"));
    REQUIRE(count_occurrences(s, "<rect") == 64);
    REQUIRE_THAT(s, ContainsSubstring("rgb("));
    REQUIRE_THAT(s, ContainsSubstring("</svg>"));

    // Extreme values map to saturated channels.
    causim::SurfaceResult hot;
    hot.grid.shape = {1, 1};
    hot.grid.lo = {0.0, 0.0};
    hot.grid.hi = {0.0, 0.0};
    hot.grid.values = {1.0};
    causim::SurfaceResult cold = hot;
    cold.grid.values = {0.0};
    std::ostringstream tiny;
    causim::write_surface_svg(tiny, hot, cold, "x");
    REQUIRE_THAT(tiny.str(), ContainsSubstring("rgb(0,255,64)"));

    // 1-D sweeps render as a strip.
    auto line = sine_env(1);
    SurfaceRequest lt;
    lt.arm = 1;
    lt.resolution = 6;
    const auto ltr = causim::compute_surface(line, lt);
    lt.arm = 0;
    const auto lcr = causim::compute_surface(line, lt);
    std::ostringstream strip;
    causim::write_surface_svg(strip, ltr, lcr, "strip");
    REQUIRE(count_occurrences(strip.str(), "<rect") == 6);
}

TEST_CASE("surface SVG rejects unsupported shapes", "[surface]") {
    causim::SurfaceResult cube;
    cube.grid.shape = {2, 2, 2};
    cube.grid.lo = {0.0, 0.0, 0.0};
    cube.grid.hi = {1.0, 1.0, 1.0};
    cube.grid.values.assign(8, 0.5);
    std::ostringstream out;
    REQUIRE_THROWS_WITH(causim::write_surface_svg(out, cube, cube, "x"),
                        ContainsSubstring("1 or 2 free dimensions"));

    causim::SurfaceResult a;
    a.grid.shape = {3};
    a.grid.lo = {0.0};
    a.grid.hi = {1.0};
    a.grid.values = {0.1, 0.2, 0.3};
    causim::SurfaceResult b = a;
    b.grid.shape = {4};
    b.grid.values.push_back(0.4);
    REQUIRE_THROWS_WITH(causim::write_surface_svg(out, a, b, "x"),
                        ContainsSubstring("differ in shape"));
}
