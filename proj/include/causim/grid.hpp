#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "causim/errors.hpp"

namespace causim {

// Regular lattice over an axis-aligned box with one stored value per node.
// Values are row-major with dimension 0 slowest. A dimension with a single
// node is constant along that axis (lo == hi).
struct Grid {
    std::vector<std::size_t> shape;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> values;

    std::size_t dims() const { return shape.size(); }

    std::size_t node_count() const {
        std::size_t n = 1;
        for (std::size_t s : shape) n *= s;
        return n;
    }

    double node_coord(std::size_t dim, std::size_t idx) const {
        if (shape[dim] == 1) return lo[dim];
        return lo[dim]
            + static_cast<double>(idx) * (hi[dim] - lo[dim])
            / static_cast<double>(shape[dim] - 1);
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t d = 0; d < shape.size(); ++d) {
            flat = flat * shape[d] + idx[d];
        }
        return flat;
    }

    // Multilinear interpolation; the query point is clamped to the hull.
    double interpolate(std::span<const double> point) const {
        if (point.size() != dims()) {
            throw ConfigError("grid: query has " + std::to_string(point.size())
                              + " dims, lattice has " + std::to_string(dims()));
        }
        const std::size_t d = dims();
        std::vector<std::size_t> base(d, 0);
        std::vector<double> frac(d, 0.0);
        std::vector<std::size_t> blend_dims;
        for (std::size_t i = 0; i < d; ++i) {
            if (shape[i] == 1) continue;
            const double span_i = hi[i] - lo[i];
            const double p = std::clamp(point[i], lo[i], hi[i]);
            double u = (p - lo[i]) / span_i * static_cast<double>(shape[i] - 1);
            // Queries at exact node coordinates must read back the stored
            // value exactly; the division above can be off by an ulp.
            const double r = std::round(u);
            if (r >= 0.0 && r <= static_cast<double>(shape[i] - 1)
                && p == node_coord(i, static_cast<std::size_t>(r))) {
                u = r;
            }
            std::size_t cell = std::min(static_cast<std::size_t>(u), shape[i] - 2);
            base[i] = cell;
            frac[i] = u - static_cast<double>(cell);
            if (frac[i] > 0.0) blend_dims.push_back(i);
        }
        double acc = 0.0;
        std::vector<std::size_t> idx(d);
        const std::size_t corners = std::size_t{1} << blend_dims.size();
        for (std::size_t c = 0; c < corners; ++c) {
            idx = base;
            double w = 1.0;
            for (std::size_t b = 0; b < blend_dims.size(); ++b) {
                const std::size_t dim = blend_dims[b];
                if (c & (std::size_t{1} << b)) {
                    idx[dim] += 1;
                    w *= frac[dim];
                } else {
                    w *= 1.0 - frac[dim];
                }
            }
            acc += w * values[flat_index(idx)];
        }
        return acc;
    }
};

inline std::vector<std::string> validate(const Grid& g, const std::string& path) {
    std::vector<std::string> errs;
    if (g.shape.empty()) {
        errs.push_back(path + ".shape: must have at least one dimension");
        return errs;
    }
    if (g.lo.size() != g.shape.size() || g.hi.size() != g.shape.size()) {
        errs.push_back(path + ": lo/hi must match shape dimensionality");
        return errs;
    }
    for (std::size_t d = 0; d < g.shape.size(); ++d) {
        if (g.shape[d] == 0) {
            errs.push_back(path + ".shape[" + std::to_string(d) + "]: must be >= 1");
        }
        if (g.shape[d] > 1 && !(g.lo[d] < g.hi[d])) {
            errs.push_back(path + ".lo[" + std::to_string(d) + "]: must be < hi");
        }
        if (g.shape[d] == 1 && g.lo[d] != g.hi[d]) {
            errs.push_back(path + ".lo[" + std::to_string(d)
                           + "]: must equal hi for single-node dimensions");
        }
    }
    if (g.values.size() != g.node_count()) {
        errs.push_back(path + ".values: expected " + std::to_string(g.node_count())
                       + " entries, got " + std::to_string(g.values.size()));
    }
    return errs;
}

// Shortest exactly-round-tripping decimal form.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[32];
            std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
            if (std::strtod(shorter, nullptr) == v) {
                return shorter;
            }
        }
    }
    return buf;
}

// CSV schema: header "dim_0,...,dim_{M-1},value", one row per lattice node,
// rows in row-major order (dimension 0 slowest).
inline void write_grid_csv(const Grid& g, std::ostream& out) {
    const std::size_t d = g.dims();
    for (std::size_t i = 0; i < d; ++i) {
        out << "dim_" << i << ',';
    }
    out << "value\n";
    std::vector<std::size_t> idx(d, 0);
    const std::size_t total = g.node_count();
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t i = 0; i < d; ++i) {
            out << format_double(g.node_coord(i, idx[i])) << ',';
        }
        out << format_double(g.values[flat]) << '\n';
        for (std::size_t i = d; i-- > 0;) {
            if (++idx[i] < g.shape[i]) break;
            idx[i] = 0;
        }
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
        out.back().pop_back();
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw DataError("grid csv line " + std::to_string(line_no)
                        + ": not a number: '" + s + "'");
    }
}

} // namespace detail

// Parses a node-list CSV back into a Grid. The nodes must form a complete
// regular lattice; spacing is checked to 1e-9 of each axis range.
inline Grid read_grid_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("grid csv: empty file");
    }
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "dim_0" || header.back() != "value") {
        throw DataError("grid csv: header must be dim_0,...,value");
    }
    const std::size_t d = header.size() - 1;
    for (std::size_t i = 0; i < d; ++i) {
        if (header[i] != "dim_" + std::to_string(i)) {
            throw DataError("grid csv: unexpected header column '" + header[i] + "'");
        }
    }

    std::vector<std::vector<double>> coords(d);
    std::vector<double> raw_values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != d + 1) {
            throw DataError("grid csv line " + std::to_string(line_no)
                            + ": expected " + std::to_string(d + 1) + " columns");
        }
        for (std::size_t i = 0; i < d; ++i) {
            coords[i].push_back(detail::parse_double(cells[i], line_no));
        }
        raw_values.push_back(detail::parse_double(cells[d], line_no));
    }
    if (raw_values.empty()) {
        throw DataError("grid csv: no data rows");
    }

    Grid g;
    g.shape.resize(d);
    g.lo.resize(d);
    g.hi.resize(d);
    std::vector<std::vector<double>> axes(d);
    for (std::size_t i = 0; i < d; ++i) {
        axes[i] = coords[i];
        std::sort(axes[i].begin(), axes[i].end());
        axes[i].erase(std::unique(axes[i].begin(), axes[i].end()), axes[i].end());
        g.shape[i] = axes[i].size();
        g.lo[i] = axes[i].front();
        g.hi[i] = axes[i].back();
        if (axes[i].size() > 2) {
            const double step = (g.hi[i] - g.lo[i])
                / static_cast<double>(axes[i].size() - 1);
            const double tol = 1e-9 * std::max(1.0, std::abs(g.hi[i] - g.lo[i]));
            for (std::size_t k = 0; k + 1 < axes[i].size(); ++k) {
                if (std::abs(axes[i][k + 1] - axes[i][k] - step) > tol) {
                    throw DataError("grid csv: axis dim_" + std::to_string(i)
                                    + " is not a regular lattice");
                }
            }
        }
    }
    if (raw_values.size() != g.node_count()) {
        throw DataError("grid csv: got " + std::to_string(raw_values.size())
                        + " rows, a full lattice needs "
                        + std::to_string(g.node_count()));
    }

    g.values.assign(g.node_count(), 0.0);
    std::vector<bool> filled(g.node_count(), false);
    std::vector<std::size_t> idx(d);
    for (std::size_t row = 0; row < raw_values.size(); ++row) {
        for (std::size_t i = 0; i < d; ++i) {
            const auto& axis = axes[i];
            const auto it = std::lower_bound(axis.begin(), axis.end(),
                                             coords[i][row]);
            idx[i] = static_cast<std::size_t>(it - axis.begin());
        }
        const std::size_t flat = g.flat_index(idx);
        if (filled[flat]) {
            throw DataError("grid csv: duplicate lattice node in row "
                            + std::to_string(row + 2));
        }
        filled[flat] = true;
        g.values[flat] = raw_values[row];
    }
    return g;
}

} // namespace causim
