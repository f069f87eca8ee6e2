#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "causim/base_functions.hpp"
#include "causim/environment.hpp"
#include "causim/errors.hpp"
#include "causim/grid.hpp"

namespace causim {

// A lattice sweep of one arm's noiseless response surface at a fixed time.
// Dimensions of x' can be pinned to a constant (slicing); the grid spans
// the free dimensions in their original order.
struct SurfaceRequest {
    std::size_t arm = 0;
    std::int64_t t = 0;
    std::size_t resolution = 101;
    // Per x'-dimension pin; empty vector = everything free.
    std::vector<std::optional<double>> fixed;
};

struct SurfaceResult {
    Grid grid;                          // over the free dimensions
    std::vector<std::size_t> free_dims; // original x' indices per grid axis
};

inline SurfaceResult compute_surface(const EnvironmentSpec& spec,
                                     const SurfaceRequest& req) {
    if (req.resolution < 2) {
        throw ConfigError("resolution: must be >= 2");
    }
    if (req.arm >= spec.arms) {
        throw ConfigError("arm: index " + std::to_string(req.arm)
                          + " out of range (arms = " + std::to_string(spec.arms)
                          + ")");
    }
    const std::size_t m = spec.dims.m_domain;
    if (!req.fixed.empty() && req.fixed.size() != m) {
        throw ConfigError("fixed: expected one entry per domain dimension (M = "
                          + std::to_string(m) + ")");
    }

    SurfaceResult out;
    const std::vector<Interval> box = domain_box(spec);
    for (std::size_t i = 0; i < m; ++i) {
        if (req.fixed.empty() || !req.fixed[i]) {
            out.free_dims.push_back(i);
        }
    }
    if (out.free_dims.empty()) {
        throw ConfigError("fixed: at least one dimension must stay free");
    }

    Grid& g = out.grid;
    for (std::size_t f : out.free_dims) {
        g.shape.push_back(req.resolution);
        g.lo.push_back(box[f].lo);
        g.hi.push_back(box[f].hi);
    }
    g.values.resize(g.node_count());

    const CompiledBase base =
        CompiledBase::compile(spec.base, spec.arms, m);
    const double d = eval_drift(spec.drift, req.t);

    std::vector<double> x_prime(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (!req.fixed.empty() && req.fixed[i]) {
            x_prime[i] = *req.fixed[i];
        }
    }

    std::vector<std::size_t> idx(out.free_dims.size(), 0);
    for (std::size_t flat = 0; flat < g.values.size(); ++flat) {
        for (std::size_t a = 0; a < out.free_dims.size(); ++a) {
            x_prime[out.free_dims[a]] = g.node_coord(a, idx[a]);
        }
        g.values[flat] = base.eval(req.arm, x_prime, d);
        for (std::size_t a = idx.size(); a-- > 0;) {
            if (++idx[a] < g.shape[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

} // namespace detail

// Two-color heatmap over a 1- or 2-dimensional sweep: the treated surface
// drives the green channel, the control surface the red channel, so
// green-dominant cells are exactly where treating wins.
inline void write_surface_svg(std::ostream& out, const SurfaceResult& treated,
                              const SurfaceResult& control,
                              const std::string& title) {
    const Grid& gt = treated.grid;
    const Grid& gc = control.grid;
    if (gt.dims() < 1 || gt.dims() > 2) {
        throw ConfigError("svg: needs 1 or 2 free dimensions, got "
                          + std::to_string(gt.dims()));
    }
    if (gt.shape != gc.shape) {
        throw ConfigError("svg: treated and control sweeps differ in shape");
    }
    const std::size_t nx = gt.shape[0];
    const std::size_t ny = gt.dims() == 2 ? gt.shape[1] : 1;
    const double plot = 600.0;
    const double margin_left = 60.0;
    const double margin_top = 40.0;
    const double margin_bottom = 40.0;
    const double cell_w = plot / static_cast<double>(nx);
    const double strip_h = gt.dims() == 2 ? plot : 60.0;
    const double cell_h = strip_h / static_cast<double>(ny);
    const double width = margin_left + plot + 20.0;
    const double height = margin_top + strip_h + margin_bottom;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << detail::svg_num(width) << "\" height=\"" << detail::svg_num(height)
        << "\" viewBox=\"0 0 " << detail::svg_num(width) << ' '
        << detail::svg_num(height) << "\">\n";
    out << "<text x=\"" << detail::svg_num(margin_left) << "\" y=\"24\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";

    std::vector<std::size_t> idx(gt.dims(), 0);
    for (std::size_t flat = 0; flat < gt.values.size(); ++flat) {
        const std::size_t ix = idx[0];
        const std::size_t iy = gt.dims() == 2 ? idx[1] : 0;
        const int green =
            static_cast<int>(std::lround(255.0 * gt.values[flat]));
        const int red = static_cast<int>(std::lround(255.0 * gc.values[flat]));
        // Axis 0 runs left to right, axis 1 bottom to top.
        const double px = margin_left + static_cast<double>(ix) * cell_w;
        const double py =
            margin_top + strip_h - static_cast<double>(iy + 1) * cell_h;
        out << "<rect x=\"" << detail::svg_num(px) << "\" y=\""
            << detail::svg_num(py) << "\" width=\""
            << detail::svg_num(cell_w + 0.5) << "\" height=\""
            << detail::svg_num(cell_h + 0.5) << "\" fill=\"rgb(" << red << ','
            << green << ",64)\"/>\n";
        for (std::size_t a = idx.size(); a-- > 0;) {
            if (++idx[a] < gt.shape[a]) break;
            idx[a] = 0;
        }
    }

    const double axis_y = margin_top + strip_h + 16.0;
    out << "<text x=\"" << detail::svg_num(margin_left) << "\" y=\""
        << detail::svg_num(axis_y)
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::svg_label(gt.lo[0]) << "</text>\n";
    out << "<text x=\"" << detail::svg_num(margin_left + plot - 30.0)
        << "\" y=\"" << detail::svg_num(axis_y)
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::svg_label(gt.hi[0]) << "</text>\n";
    if (gt.dims() == 2) {
        out << "<text x=\"" << detail::svg_num(margin_left - 40.0) << "\" y=\""
            << detail::svg_num(margin_top + strip_h - 4.0)
            << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::svg_label(gt.lo[1]) << "</text>\n";
        out << "<text x=\"" << detail::svg_num(margin_left - 40.0) << "\" y=\""
            << detail::svg_num(margin_top + 12.0)
            << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::svg_label(gt.hi[1]) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace causim
