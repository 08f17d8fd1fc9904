#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <toml.hpp>

#include "slidenoise/core.hpp"
#include "slidenoise/error.hpp"
#include "slidenoise/io/csv.hpp"

namespace slidenoise::io {

struct SystemSection {
    PiecewiseLinearCoeffs coeffs{2.0, 1.0, 1.0, 0.0};
    double epsilon = 0.01;
    double kappa = 0.0;
    double x_cap = 1.0;
};

struct SimSection {
    double dt = 1e-4;
    double t_end = 1.0;
    std::uint64_t n_paths = 100000;
    std::uint64_t n_paths_full = 1000000;
    std::uint64_t seed = 1;
};

struct DensitySection {
    double x0 = 0.02;
    std::vector<double> times_over_eps{0.05, 0.5, 1.0, 10.0};
    double x_min = -0.03;
    double x_max = 0.06;
    std::uint64_t n_x = 181;
};

struct QssSection {
    std::uint64_t n_x = 201;
    double span = 20.0;  // grid covers [-span eps / a_left, span eps / a_right]
};

struct MomentsSection {
    double t = 1.0;
    double y0 = 0.0;
};

struct VarianceSection {
    double t = 1.0;
    // (c_left, c_right, d_left, d_right) per row
    std::vector<std::array<double, 4>> rows{{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0},
                                            {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 1, 1, 1}};
    std::vector<double> symmetric_times;  // optional exact-variance comparison for a_left == a_right
};

struct RelaySection {
    double zeta = -0.06;
    Vec3 x0{-0.011690255, -1.180778043, 0.0};
    double transient = 500.0;
    double tol = 1e-9;
    double rtol = 1e-10;
    double atol = 1e-12;
    double t_end = 100.0;
    double dt = 1e-4;
    std::uint64_t runs = 200;
    std::uint64_t runs_full = 1000;
    std::int64_t debounce = 50;
    std::vector<double> epsilons{0.0, 1e-5, 3.1622776601683795e-5, 1e-4, 3.1622776601683795e-4, 1e-3};
    bool dump_runs = false;
};

struct EscapeSection {
    std::vector<double> epsilons{0.2, 0.1, 0.05};
    double x_b = 1.0;
    double x0 = 0.0;
};

struct AnalyticSection {
    double abs_tol = 1e-18;
    double rel_tol = 1e-11;
    std::uint64_t max_subdivisions = 4000;
};

struct ExperimentConfig {
    SystemSection system;
    SimSection sim;
    DensitySection density;
    QssSection qss;
    MomentsSection moments;
    VarianceSection variance;
    RelaySection relay;
    EscapeSection escape;
    AnalyticSection analytic;
    bool full_scale = false;
    bool dump_paths = false;
    std::uint64_t path_stride = 100;

    [[nodiscard]] PiecewiseLinearSystem make_system() const {
        return make_piecewise_linear(system.coeffs, system.epsilon, system.kappa);
    }
    [[nodiscard]] std::uint64_t planar_paths() const { return full_scale ? sim.n_paths_full : sim.n_paths; }
    [[nodiscard]] std::uint64_t relay_runs() const { return full_scale ? relay.runs_full : relay.runs; }
};

namespace detail {

class Reader {
public:
    Reader(const toml::table& root, std::string_view section) : section_(section) {
        if (const auto* node = root.get(section)) {
            tbl_ = node->as_table();
            if (!tbl_) throw Error(Errc::Config, fmt::format("[{}] must be a table", section));
        }
    }

    template <class T>
    void get(std::string_view key, T& out) {
        seen_.insert(std::string(key));
        if (!tbl_) return;
        const toml::node* node = tbl_->get(key);
        if (!node) return;
        if constexpr (std::is_same_v<T, double>) {
            auto v = node->value<double>();
            if (!v) fail(key, "a number");
            out = *v;
        } else if constexpr (std::is_same_v<T, bool>) {
            auto v = node->value<bool>();
            if (!v) fail(key, "a boolean");
            out = *v;
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            auto v = node->value<std::int64_t>();
            if (!v || *v < 0) fail(key, "a nonnegative integer");
            out = static_cast<std::uint64_t>(*v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
            auto v = node->value<std::int64_t>();
            if (!v) fail(key, "an integer");
            out = *v;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            out = numbers(key, *node);
        } else if constexpr (std::is_same_v<T, Vec3>) {
            auto v = numbers(key, *node);
            if (v.size() != 3) fail(key, "an array of 3 numbers");
            out = {v[0], v[1], v[2]};
        } else if constexpr (std::is_same_v<T, std::vector<std::array<double, 4>>>) {
            const auto* arr = node->as_array();
            if (!arr) fail(key, "an array of 4-number arrays");
            out.clear();
            for (const auto& el : *arr) {
                auto v = numbers(key, el);
                if (v.size() != 4) fail(key, "an array of 4-number arrays");
                out.push_back({v[0], v[1], v[2], v[3]});
            }
        }
    }

    /// Rejects keys that were never asked for, which are almost always typos.
    void finish() const {
        if (!tbl_) return;
        for (const auto& [k, v] : *tbl_) {
            if (!seen_.count(std::string(k.str()))) {
                throw Error(Errc::Config, fmt::format("unknown key '{}' in [{}]", k.str(), section_));
            }
        }
    }

private:
    [[noreturn]] void fail(std::string_view key, std::string_view what) const {
        throw Error(Errc::Config, fmt::format("[{}] {} must be {}", section_, key, what));
    }

    std::vector<double> numbers(std::string_view key, const toml::node& node) const {
        const auto* arr = node.as_array();
        if (!arr) fail(key, "an array of numbers");
        std::vector<double> v;
        for (const auto& el : *arr) {
            auto d = el.value<double>();
            if (!d) fail(key, "an array of numbers");
            v.push_back(*d);
        }
        return v;
    }

    std::string section_;
    const toml::table* tbl_ = nullptr;
    std::set<std::string> seen_;
};

inline void check(bool ok, std::string_view msg) {
    if (!ok) throw Error(Errc::Config, std::string(msg));
}

inline bool increasing_positive(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) return false;
        if (i && !(v[i] > v[i - 1])) return false;
    }
    return true;
}

}  // namespace detail

/// Checks everything that can be checked before a run starts. Throws Error.
inline void validate(const ExperimentConfig& c) {
    (void)c.make_system();
    using detail::check;
    check(c.system.x_cap > 0.0, "[system] x_cap must be positive");
    check(c.sim.dt > 0.0 && c.sim.t_end > 0.0, "[sim] dt and t_end must be positive");
    check(c.sim.n_paths >= 1 && c.sim.n_paths_full >= 1, "[sim] path counts must be at least 1");
    check(c.density.n_x >= 2 && c.density.x_max > c.density.x_min, "[density] grid is empty");
    check(detail::increasing_positive(c.density.times_over_eps), "[density] times must be positive and increasing");
    check(c.qss.n_x >= 2 && c.qss.span > 0.0, "[qss] grid is empty");
    check(c.moments.t > 0.0, "[moments] t must be positive");
    check(c.variance.t > 0.0, "[variance] t must be positive");
    check(c.variance.symmetric_times.empty() || detail::increasing_positive(c.variance.symmetric_times),
          "[variance] symmetric_times must be positive and increasing");
    check(c.relay.transient >= 0.0 && c.relay.tol > 0.0, "[relay] transient/tol invalid");
    check(c.relay.rtol > 0.0 && c.relay.atol > 0.0, "[relay] integrator tolerances must be positive");
    check(c.relay.t_end > 0.0 && c.relay.dt > 0.0, "[relay] t_end and dt must be positive");
    check(c.relay.runs >= 1 && c.relay.runs_full >= 1, "[relay] run counts must be at least 1");
    check(c.relay.debounce >= 1, "[relay] debounce must be at least 1");
    for (double e : c.relay.epsilons) check(e >= 0.0 && std::isfinite(e), "[relay] epsilons must be nonnegative");
    for (double e : c.escape.epsilons) check(e > 0.0 && std::isfinite(e), "[escape] epsilons must be positive");
    check(c.escape.x_b > 0.0 && std::abs(c.escape.x0) < c.escape.x_b, "[escape] need |x0| < x_b");
    check(c.analytic.abs_tol > 0.0 && c.analytic.rel_tol > 0.0, "[analytic] tolerances must be positive");
    check(c.analytic.max_subdivisions >= 1, "[analytic] max_subdivisions must be at least 1");
    check(c.path_stride >= 1, "[output] path_stride must be at least 1");
}

inline ExperimentConfig parse_config(const toml::table& root) {
    static const std::set<std::string> sections{"system", "sim",    "density", "qss",      "moments",
                                                "variance", "relay", "escape", "analytic", "output"};
    for (const auto& [k, v] : root) {
        if (!sections.count(std::string(k.str()))) {
            throw Error(Errc::Config, fmt::format("unknown section [{}]", k.str()));
        }
    }
    ExperimentConfig c;
    {
        detail::Reader r(root, "system");
        auto& s = c.system;
        r.get("a_left", s.coeffs.a_left);
        r.get("a_right", s.coeffs.a_right);
        r.get("b_left", s.coeffs.b_left);
        r.get("b_right", s.coeffs.b_right);
        r.get("c_left", s.coeffs.c_left);
        r.get("c_right", s.coeffs.c_right);
        r.get("d_left", s.coeffs.d_left);
        r.get("d_right", s.coeffs.d_right);
        r.get("epsilon", s.epsilon);
        r.get("kappa", s.kappa);
        r.get("x_cap", s.x_cap);
        r.finish();
    }
    {
        detail::Reader r(root, "sim");
        r.get("dt", c.sim.dt);
        r.get("t_end", c.sim.t_end);
        r.get("n_paths", c.sim.n_paths);
        r.get("n_paths_full", c.sim.n_paths_full);
        r.get("seed", c.sim.seed);
        r.finish();
    }
    {
        detail::Reader r(root, "density");
        r.get("x0", c.density.x0);
        r.get("times_over_eps", c.density.times_over_eps);
        r.get("x_min", c.density.x_min);
        r.get("x_max", c.density.x_max);
        r.get("n_x", c.density.n_x);
        r.finish();
    }
    {
        detail::Reader r(root, "qss");
        r.get("n_x", c.qss.n_x);
        r.get("span", c.qss.span);
        r.finish();
    }
    {
        detail::Reader r(root, "moments");
        r.get("t", c.moments.t);
        r.get("y0", c.moments.y0);
        r.finish();
    }
    {
        detail::Reader r(root, "variance");
        r.get("t", c.variance.t);
        r.get("rows", c.variance.rows);
        r.get("symmetric_times", c.variance.symmetric_times);
        r.finish();
    }
    {
        detail::Reader r(root, "relay");
        auto& s = c.relay;
        r.get("zeta", s.zeta);
        r.get("x0", s.x0);
        r.get("transient", s.transient);
        r.get("tol", s.tol);
        r.get("rtol", s.rtol);
        r.get("atol", s.atol);
        r.get("t_end", s.t_end);
        r.get("dt", s.dt);
        r.get("runs", s.runs);
        r.get("runs_full", s.runs_full);
        r.get("debounce", s.debounce);
        r.get("epsilons", s.epsilons);
        r.get("dump_runs", s.dump_runs);
        r.finish();
    }
    {
        detail::Reader r(root, "escape");
        r.get("epsilons", c.escape.epsilons);
        r.get("x_b", c.escape.x_b);
        r.get("x0", c.escape.x0);
        r.finish();
    }
    {
        detail::Reader r(root, "analytic");
        r.get("abs_tol", c.analytic.abs_tol);
        r.get("rel_tol", c.analytic.rel_tol);
        r.get("max_subdivisions", c.analytic.max_subdivisions);
        r.finish();
    }
    {
        detail::Reader r(root, "output");
        r.get("dump_paths", c.dump_paths);
        r.get("path_stride", c.path_stride);
        r.finish();
    }
    validate(c);
    return c;
}

inline ExperimentConfig parse_config(std::string_view text) {
    try {
        return parse_config(toml::parse(text));
    } catch (const toml::parse_error& e) {
        throw Error(Errc::Config, fmt::format("TOML syntax error: {}", e.description()));
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    try {
        return parse_config(toml::parse_file(path.string()));
    } catch (const toml::parse_error& e) {
        throw Error(Errc::Config,
                    fmt::format("{}:{}: {}", path.string(), e.source().begin.line, e.description()));
    }
}

/// Every setting that influences results, one per line. Thread count and output location
/// are deliberately absent so they never change the hash.
inline std::string canonical_text(const ExperimentConfig& c) {
    std::string out;
    auto kv = [&](std::string_view k, double v) { out += fmt::format("{}={}\n", k, format_double(v)); };
    auto kvu = [&](std::string_view k, std::uint64_t v) { out += fmt::format("{}={}\n", k, v); };
    auto kvl = [&](std::string_view k, const std::vector<double>& v) {
        out += fmt::format("{}=", k);
        for (double d : v) out += format_double(d) + ";";
        out += "\n";
    };
    const auto& s = c.system.coeffs;
    kv("system.a_left", s.a_left);
    kv("system.a_right", s.a_right);
    kv("system.b_left", s.b_left);
    kv("system.b_right", s.b_right);
    kv("system.c_left", s.c_left);
    kv("system.c_right", s.c_right);
    kv("system.d_left", s.d_left);
    kv("system.d_right", s.d_right);
    kv("system.epsilon", c.system.epsilon);
    kv("system.kappa", c.system.kappa);
    kv("system.x_cap", c.system.x_cap);
    kv("sim.dt", c.sim.dt);
    kv("sim.t_end", c.sim.t_end);
    kvu("sim.paths", c.planar_paths());
    kvu("sim.seed", c.sim.seed);
    kv("density.x0", c.density.x0);
    kvl("density.times_over_eps", c.density.times_over_eps);
    kv("density.x_min", c.density.x_min);
    kv("density.x_max", c.density.x_max);
    kvu("density.n_x", c.density.n_x);
    kvu("qss.n_x", c.qss.n_x);
    kv("qss.span", c.qss.span);
    kv("moments.t", c.moments.t);
    kv("moments.y0", c.moments.y0);
    kv("variance.t", c.variance.t);
    for (const auto& row : c.variance.rows) kvl("variance.row", {row.begin(), row.end()});
    kvl("variance.symmetric_times", c.variance.symmetric_times);
    kv("relay.zeta", c.relay.zeta);
    kvl("relay.x0", {c.relay.x0.begin(), c.relay.x0.end()});
    kv("relay.transient", c.relay.transient);
    kv("relay.tol", c.relay.tol);
    kv("relay.rtol", c.relay.rtol);
    kv("relay.atol", c.relay.atol);
    kv("relay.t_end", c.relay.t_end);
    kv("relay.dt", c.relay.dt);
    kvu("relay.runs", c.relay_runs());
    kvu("relay.debounce", static_cast<std::uint64_t>(c.relay.debounce));
    kvl("relay.epsilons", c.relay.epsilons);
    kvu("relay.dump_runs", c.relay.dump_runs ? 1 : 0);
    kvl("escape.epsilons", c.escape.epsilons);
    kv("escape.x_b", c.escape.x_b);
    kv("escape.x0", c.escape.x0);
    kv("analytic.abs_tol", c.analytic.abs_tol);
    kv("analytic.rel_tol", c.analytic.rel_tol);
    kvu("analytic.max_subdivisions", c.analytic.max_subdivisions);
    kvu("output.dump_paths", c.dump_paths ? 1 : 0);
    kvu("output.path_stride", c.path_stride);
    return out;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(canonical_text(c)); }

}  // namespace slidenoise::io
