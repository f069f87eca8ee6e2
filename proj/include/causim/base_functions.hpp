#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "causim/context.hpp"
#include "causim/drift.hpp"
#include "causim/errors.hpp"
#include "causim/grid.hpp"
#include "causim/rng.hpp"

namespace causim {

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Declarative base-function specs (all arms of one environment)
// ---------------------------------------------------------------------------

// b_i = (sin(d + lambda_i * prod_m [x'_m + g_{i,m}]) + 1) / 2.
// By default only the control arm (i = 0) carries the displacement g; any
// arm can be given its own vector through g_per_arm.
struct SineBaseSpec {
    std::vector<int> lambda;  // one per arm, integer >= 1
    std::vector<double> g;    // length M, control-arm displacement
    std::optional<std::vector<std::vector<double>>> g_per_arm;
};

// b_i = sigmoid((k_i + h(d) * 1)^T upsilon_i(x')) with
// upsilon_i(x') = (1, prod^1, ..., prod^{q-1})^T; factor j of term p reads
// the dimension chosen once, at construction, by the seeded selector.
// h(z) = h_low + (h_high - h_low) * (sin(z) + 1) / 2.
struct PolyBaseSpec {
    std::size_t q = 0;
    std::vector<std::vector<double>> k; // arms x q coefficients, pairwise distinct
    double h_low = 0.0;
    double h_high = 0.0;
    std::uint64_t selector_seed = 0;
};

// Frozen response surfaces (e.g. a previously dumped model); ignores drift.
struct TabulatedBaseSpec {
    std::vector<Grid> per_arm;
};

struct BaseSpec;

struct MixtureComponent {
    double weight = 0.0;
    std::shared_ptr<const BaseSpec> base;
};

// Convex combination of base functions, chosen independently per arm. The
// component spec is evaluated at the owning arm's index.
struct MixtureBaseSpec {
    std::vector<std::vector<MixtureComponent>> per_arm;
};

struct BaseSpec {
    std::variant<SineBaseSpec, PolyBaseSpec, TabulatedBaseSpec, MixtureBaseSpec> v;
};

inline std::size_t spec_arm_count(const BaseSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SineBaseSpec>) {
                return s.lambda.size();
            } else if constexpr (std::is_same_v<T, PolyBaseSpec>) {
                return s.k.size();
            } else if constexpr (std::is_same_v<T, TabulatedBaseSpec>) {
                return s.per_arm.size();
            } else {
                return s.per_arm.size();
            }
        },
        spec.v);
}

inline std::vector<std::string> validate(const BaseSpec& spec, std::size_t arms,
                                         std::size_t m,
                                         const std::string& path = "base");

namespace detail {

inline std::vector<std::string> validate_sine(const SineBaseSpec& s,
                                              std::size_t arms, std::size_t m,
                                              const std::string& path) {
    std::vector<std::string> errs;
    if (s.lambda.size() != arms) {
        errs.push_back(path + ".lambda: expected " + std::to_string(arms)
                       + " entries (one per arm)");
    }
    for (std::size_t i = 0; i < s.lambda.size(); ++i) {
        if (s.lambda[i] < 1) {
            errs.push_back(path + ".lambda[" + std::to_string(i)
                           + "]: must be an integer >= 1");
        }
    }
    if (s.g.size() != m) {
        errs.push_back(path + ".g: expected length M = " + std::to_string(m));
    }
    if (s.g_per_arm) {
        if (s.g_per_arm->size() != arms) {
            errs.push_back(path + ".g_per_arm: expected " + std::to_string(arms)
                           + " vectors");
        }
        for (std::size_t i = 0; i < s.g_per_arm->size(); ++i) {
            if ((*s.g_per_arm)[i].size() != m) {
                errs.push_back(path + ".g_per_arm[" + std::to_string(i)
                               + "]: expected length M = " + std::to_string(m));
            }
        }
    }
    return errs;
}

inline std::vector<std::string> validate_poly(const PolyBaseSpec& s,
                                              std::size_t arms, std::size_t /*m*/,
                                              const std::string& path) {
    std::vector<std::string> errs;
    if (s.q < 1) {
        errs.push_back(path + ".q: must be >= 1");
    }
    if (s.k.size() != arms) {
        errs.push_back(path + ".k: expected " + std::to_string(arms)
                       + " coefficient vectors (one per arm)");
    }
    for (std::size_t i = 0; i < s.k.size(); ++i) {
        if (s.k[i].size() != s.q) {
            errs.push_back(path + ".k[" + std::to_string(i) + "]: expected q = "
                           + std::to_string(s.q) + " coefficients");
        }
    }
    for (std::size_t i = 0; i < s.k.size(); ++i) {
        for (std::size_t j = i + 1; j < s.k.size(); ++j) {
            if (s.k[i] == s.k[j]) {
                errs.push_back(path + ".k: coefficient vectors of arms "
                               + std::to_string(i) + " and " + std::to_string(j)
                               + " must differ");
            }
        }
    }
    if (!(s.h_low <= s.h_high)) {
        errs.push_back(path + ".h: interval must satisfy a <= b");
    }
    return errs;
}

inline std::vector<std::string> validate_tabulated(const TabulatedBaseSpec& s,
                                                   std::size_t arms,
                                                   std::size_t m,
                                                   const std::string& path) {
    std::vector<std::string> errs;
    if (s.per_arm.size() != arms) {
        errs.push_back(path + ".arms: expected " + std::to_string(arms)
                       + " grids (one per arm)");
    }
    for (std::size_t i = 0; i < s.per_arm.size(); ++i) {
        const std::string gp = path + ".arms[" + std::to_string(i) + "]";
        auto sub = validate(s.per_arm[i], gp);
        errs.insert(errs.end(), sub.begin(), sub.end());
        if (!sub.empty()) continue;
        if (s.per_arm[i].dims() != m) {
            errs.push_back(gp + ": grid has " + std::to_string(s.per_arm[i].dims())
                           + " dims, domain has M = " + std::to_string(m));
        }
        for (double v : s.per_arm[i].values) {
            if (!(v >= 0.0 && v <= 1.0)) {
                errs.push_back(gp + ".values: all values must lie in [0, 1]");
                break;
            }
        }
    }
    return errs;
}

inline std::vector<std::string> validate_mixture(const MixtureBaseSpec& s,
                                                 std::size_t arms, std::size_t m,
                                                 const std::string& path) {
    std::vector<std::string> errs;
    if (s.per_arm.size() != arms) {
        errs.push_back(path + ".arms: expected " + std::to_string(arms)
                       + " component lists (one per arm)");
    }
    for (std::size_t i = 0; i < s.per_arm.size(); ++i) {
        const std::string ap = path + ".arms[" + std::to_string(i) + "]";
        const auto& comps = s.per_arm[i];
        if (comps.empty()) {
            errs.push_back(ap + ": needs at least one component");
            continue;
        }
        double total = 0.0;
        for (std::size_t j = 0; j < comps.size(); ++j) {
            const std::string cp = ap + "[" + std::to_string(j) + "]";
            if (!(comps[j].weight >= 0.0)) {
                errs.push_back(cp + ".weight: must be >= 0");
            }
            total += comps[j].weight;
            if (!comps[j].base) {
                errs.push_back(cp + ".base: missing component spec");
                continue;
            }
            if (spec_arm_count(*comps[j].base) != arms) {
                errs.push_back(cp + ".base: component must describe "
                               + std::to_string(arms) + " arms");
            }
            auto sub = validate(*comps[j].base, arms, m, cp + ".base");
            errs.insert(errs.end(), sub.begin(), sub.end());
        }
        if (std::abs(total - 1.0) > 1e-9) {
            errs.push_back(ap + ": weights must sum to 1 (got "
                           + format_double(total) + ")");
        }
    }
    return errs;
}

} // namespace detail

inline std::vector<std::string> validate(const BaseSpec& spec, std::size_t arms,
                                         std::size_t m, const std::string& path) {
    return std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SineBaseSpec>) {
                return detail::validate_sine(s, arms, m, path);
            } else if constexpr (std::is_same_v<T, PolyBaseSpec>) {
                return detail::validate_poly(s, arms, m, path);
            } else if constexpr (std::is_same_v<T, TabulatedBaseSpec>) {
                return detail::validate_tabulated(s, arms, m, path);
            } else {
                return detail::validate_mixture(s, arms, m, path);
            }
        },
        spec.v);
}

// ---------------------------------------------------------------------------
// Compiled per-arm evaluators
// ---------------------------------------------------------------------------

struct ArmEval;

struct SineArm {
    int lambda = 1;
    std::vector<double> displacement; // always length M; zero when unset
};

struct PolyArm {
    std::vector<double> coeffs;
    double h_low = 0.0;
    double h_high = 0.0;
    // term_dims[p] holds the p frozen dimension choices of product term p;
    // term 0 is the constant 1 and has no factors.
    std::vector<std::vector<std::size_t>> term_dims;
};

struct TabulatedArm {
    Grid grid;
};

struct MixtureArm {
    std::vector<double> weights;
    std::vector<std::shared_ptr<const ArmEval>> components;
};

struct ArmEval {
    std::variant<SineArm, PolyArm, TabulatedArm, MixtureArm> node;
};

inline double eval_arm(const ArmEval& arm, std::span<const double> x_prime,
                       double drift_value) {
    return std::visit(
        [&](const auto& a) -> double {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, SineArm>) {
                double prod = 1.0;
                for (std::size_t mi = 0; mi < x_prime.size(); ++mi) {
                    prod *= x_prime[mi] + a.displacement[mi];
                }
                return 0.5
                    * (std::sin(drift_value + static_cast<double>(a.lambda) * prod)
                       + 1.0);
            } else if constexpr (std::is_same_v<T, PolyArm>) {
                const double h = a.h_low
                    + (a.h_high - a.h_low) * (std::sin(drift_value) + 1.0) / 2.0;
                double acc = 0.0;
                for (std::size_t p = 0; p < a.coeffs.size(); ++p) {
                    double term = 1.0;
                    for (std::size_t dim : a.term_dims[p]) {
                        term *= x_prime[dim];
                    }
                    acc += (a.coeffs[p] + h) * term;
                }
                return sigmoid(acc);
            } else if constexpr (std::is_same_v<T, TabulatedArm>) {
                return a.grid.interpolate(x_prime);
            } else {
                double acc = 0.0;
                for (std::size_t j = 0; j < a.weights.size(); ++j) {
                    acc += a.weights[j]
                        * eval_arm(*a.components[j], x_prime, drift_value);
                }
                return acc;
            }
        },
        arm.node);
}

// All-arm evaluator with frozen polynomial selection tables. Construction
// validates the spec; evaluation is pure and safe to share across threads.
class CompiledBase {
public:
    static CompiledBase compile(const BaseSpec& spec, std::size_t arms,
                                std::size_t m) {
        auto errs = validate(spec, arms, m);
        if (!errs.empty()) {
            std::string joined;
            for (const auto& e : errs) {
                if (!joined.empty()) joined += "; ";
                joined += e;
            }
            throw ConfigError(joined);
        }
        CompiledBase out;
        out.m_ = m;
        out.arms_.reserve(arms);
        for (std::size_t i = 0; i < arms; ++i) {
            out.arms_.push_back(compile_arm(spec, i, arms, m));
        }
        return out;
    }

    double eval(std::size_t arm, std::span<const double> x_prime,
                double drift_value) const {
        if (arm >= arms_.size()) {
            throw std::out_of_range("base eval: arm " + std::to_string(arm)
                                    + " out of range");
        }
        if (x_prime.size() != m_) {
            throw ConfigError("base eval: context has "
                              + std::to_string(x_prime.size())
                              + " dims, domain has M = " + std::to_string(m_));
        }
        return eval_arm(arms_[arm], x_prime, drift_value);
    }

    std::size_t arm_count() const { return arms_.size(); }
    std::size_t domain_dims() const { return m_; }
    const ArmEval& arm(std::size_t i) const { return arms_.at(i); }

private:
    static ArmEval compile_arm(const BaseSpec& spec, std::size_t arm,
                               std::size_t arms, std::size_t m);

    std::vector<ArmEval> arms_;
    std::size_t m_ = 0;
};

namespace detail {

inline std::vector<std::vector<std::size_t>>
draw_selection_table(std::uint64_t seed, std::size_t q, std::size_t m) {
    RngStream rng(seed);
    std::vector<std::vector<std::size_t>> table(q);
    for (std::size_t p = 0; p < q; ++p) {
        table[p].reserve(p);
        for (std::size_t f = 0; f < p; ++f) {
            table[p].push_back(rng.uniform_index(m));
        }
    }
    return table;
}

// Selection tables for all arms. Tables must differ pairwise so that
// upsilon_0 != upsilon_1; when M = 1 or q = 1 equal tables are forced and
// the distinct coefficient vectors carry the causal difference instead.
inline std::vector<std::vector<std::vector<std::size_t>>>
materialize_selection_tables(const PolyBaseSpec& s, std::size_t arms,
                             std::size_t m) {
    std::vector<std::vector<std::vector<std::size_t>>> tables;
    tables.reserve(arms);
    const bool can_differ = m >= 2 && s.q >= 2;
    for (std::size_t arm = 0; arm < arms; ++arm) {
        const std::uint64_t arm_seed = derive_seed(s.selector_seed, arm);
        auto table = draw_selection_table(derive_seed(arm_seed, 0), s.q, m);
        if (can_differ) {
            for (std::uint64_t attempt = 1; attempt <= 64; ++attempt) {
                const bool clashes =
                    std::any_of(tables.begin(), tables.end(),
                                [&](const auto& t) { return t == table; });
                if (!clashes) break;
                if (attempt == 64) {
                    throw ConfigError(
                        "base.selector_seed: could not draw distinct "
                        "per-arm selection tables");
                }
                table = draw_selection_table(derive_seed(arm_seed, attempt),
                                             s.q, m);
            }
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

} // namespace detail

inline ArmEval CompiledBase::compile_arm(const BaseSpec& spec, std::size_t arm,
                                         std::size_t arms, std::size_t m) {
    return std::visit(
        [&](const auto& s) -> ArmEval {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SineBaseSpec>) {
                SineArm a;
                a.lambda = s.lambda[arm];
                if (s.g_per_arm) {
                    a.displacement = (*s.g_per_arm)[arm];
                } else if (arm == 0) {
                    a.displacement = s.g;
                } else {
                    a.displacement.assign(m, 0.0);
                }
                return ArmEval{std::move(a)};
            } else if constexpr (std::is_same_v<T, PolyBaseSpec>) {
                PolyArm a;
                a.coeffs = s.k[arm];
                a.h_low = s.h_low;
                a.h_high = s.h_high;
                a.term_dims = detail::materialize_selection_tables(s, arms, m)[arm];
                return ArmEval{std::move(a)};
            } else if constexpr (std::is_same_v<T, TabulatedBaseSpec>) {
                return ArmEval{TabulatedArm{s.per_arm[arm]}};
            } else {
                MixtureArm a;
                for (const auto& comp : s.per_arm[arm]) {
                    CompiledBase child = CompiledBase::compile(*comp.base, arms, m);
                    a.weights.push_back(comp.weight);
                    a.components.push_back(
                        std::make_shared<const ArmEval>(child.arm(arm)));
                }
                return ArmEval{std::move(a)};
            }
        },
        spec.v);
}

// ---------------------------------------------------------------------------
// One-shot entry points matching the per-flavor operations. Environments
// precompile instead; these recompile the spec on every call.
// ---------------------------------------------------------------------------

inline double sine_base(std::size_t arm, const ExtendedContext& ctx,
                        std::int64_t t, const SineBaseSpec& spec,
                        const DriftSpec& drift) {
    auto compiled = CompiledBase::compile(BaseSpec{spec}, spec.lambda.size(),
                                          ctx.dims());
    return compiled.eval(arm, ctx.x_prime, eval_drift(drift, t));
}

inline double poly_base(std::size_t arm, const ExtendedContext& ctx,
                        std::int64_t t, const PolyBaseSpec& spec,
                        const DriftSpec& drift) {
    auto compiled = CompiledBase::compile(BaseSpec{spec}, spec.k.size(),
                                          ctx.dims());
    return compiled.eval(arm, ctx.x_prime, eval_drift(drift, t));
}

inline double tabulated_base(std::size_t arm, const ExtendedContext& ctx,
                             const TabulatedBaseSpec& spec) {
    auto compiled = CompiledBase::compile(BaseSpec{spec}, spec.per_arm.size(),
                                          ctx.dims());
    return compiled.eval(arm, ctx.x_prime, 0.0);
}

inline double mixture_base(std::size_t arm, const ExtendedContext& ctx,
                           std::int64_t t, const MixtureBaseSpec& spec,
                           const DriftSpec& drift) {
    auto compiled = CompiledBase::compile(BaseSpec{spec}, spec.per_arm.size(),
                                          ctx.dims());
    return compiled.eval(arm, ctx.x_prime, eval_drift(drift, t));
}

} // namespace causim
