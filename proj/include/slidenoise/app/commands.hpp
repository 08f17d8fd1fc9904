#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "slidenoise/analytic/qss.hpp"
#include "slidenoise/analytic/transition.hpp"
#include "slidenoise/app/experiments.hpp"
#include "slidenoise/filippov/relay.hpp"
#include "slidenoise/io/config.hpp"
#include "slidenoise/io/csv.hpp"
#include "slidenoise/montecarlo/planar.hpp"
#include "slidenoise/verify/checks.hpp"

namespace slidenoise::app {

struct RunOptions {
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    bool quick = false;  // verify only: skip Monte Carlo and relay checks
};

namespace detail {

class Outputs {
public:
    Outputs(const io::ExperimentConfig& cfg, const RunOptions& opt)
        : dir_(opt.out_dir), seed_(cfg.sim.seed), hash_(io::config_hash(cfg)) {}

    io::CsvWriter open(const std::string& name, std::vector<std::string> columns) {
        written_.push_back(dir_ / name);
        return io::CsvWriter(dir_ / name, std::move(columns), seed_, hash_);
    }

    void report() const {
        for (const auto& p : written_) fmt::print("wrote {}\n", p.string());
    }

private:
    std::filesystem::path dir_;
    std::uint64_t seed_;
    std::uint64_t hash_;
    std::vector<std::filesystem::path> written_;
};

inline montecarlo::SimConfig planar_sim(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    montecarlo::SimConfig s;
    s.dt = cfg.sim.dt;
    s.t_end = cfg.sim.t_end;
    s.n_paths = cfg.planar_paths();
    s.master_seed = cfg.sim.seed;
    s.threads = opt.threads;
    return s;
}

inline montecarlo::SimConfig relay_sim(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    montecarlo::SimConfig s;
    s.dt = cfg.relay.dt;
    s.t_end = cfg.relay.t_end;
    s.n_paths = cfg.relay_runs();
    s.master_seed = cfg.sim.seed;
    s.threads = opt.threads;
    return s;
}

inline analytic::TransitionDensity transition_density(const io::ExperimentConfig& cfg) {
    const auto& c = cfg.system.coeffs;
    return {c.a_left, c.a_right, cfg.system.epsilon,
            {cfg.analytic.abs_tol, cfg.analytic.rel_tol, static_cast<int>(cfg.analytic.max_subdivisions)}};
}

inline void warn_coarse_step(const montecarlo::SimConfig& s, double eps) {
    if (montecarlo::coarse_step(s, eps)) {
        fmt::print(stderr, "warning: dt = {} exceeds epsilon = {}; the boundary layer is under-resolved\n", s.dt, eps);
    }
}

}  // namespace detail

/// Transition density slices at t = k eps on an x grid, plus mass and gap to the steady state.
inline int cmd_density(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto td = detail::transition_density(cfg);
    const auto grid = linear_grid(cfg.density.x_min, cfg.density.x_max, cfg.density.n_x);
    auto csv = out.open("density.csv", {"t", "x", "p", "p_steady"});
    auto summary = out.open("density_summary.csv", {"t", "t_over_eps", "mass", "sup_gap_scaled"});
    for (double k : cfg.density.times_over_eps) {
        const double t = k * td.epsilon;
        const auto s = density_slice(td, cfg.density.x0, t, grid);
        for (std::size_t i = 0; i < s.x.size(); ++i) csv.row({t, s.x[i], s.p[i], s.p_steady[i]});
        summary.row({t, k, s.mass, s.sup_gap_scaled});
    }
    out.report();
    return 0;
}

/// Quasi-steady-state density on a grid, and its normalization and moments against the expansions.
inline int cmd_qss(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto sys = cfg.make_system();
    const analytic::QssDensity q(sys, drift_bound_radius(sys, cfg.system.x_cap));
    const double eps = sys.epsilon();
    const double lo = std::max(-q.truncation(), -cfg.qss.span * eps / sys.a_left());
    const double hi = std::min(q.truncation(), cfg.qss.span * eps / sys.a_right());
    auto csv = out.open("qss.csv", {"x", "p", "log_p"});
    for (double x : linear_grid(lo, hi, cfg.qss.n_x)) csv.row({x, q.pdf(x), q.log_pdf(x)});
    const auto m = analytic::qss_moments(q);
    const auto ms = analytic::qss_moments_series(sys);
    auto summary = out.open("qss_summary.csv", {"quantity", "numeric", "series"});
    summary.row({std::string("K_eps"), q.K_eps(), analytic::qss_normalization_series(sys)});
    summary.row({std::string("mean_sgn_x"), m.mean_sgn, ms.mean_sgn});
    summary.row({std::string("mean_x"), m.mean_x, ms.mean_x});
    summary.row({std::string("mean_x_sgn_x"), m.mean_xsgn, ms.mean_xsgn});
    out.report();
    return 0;
}

/// Analytic moments against one ensemble started in the quasi-steady state.
inline int cmd_moments(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto sys = cfg.make_system();
    auto sim = detail::planar_sim(cfg, opt);
    sim.t_end = cfg.moments.t;
    detail::warn_coarse_step(sim, sys.epsilon());
    const montecarlo::PlanarInit init{montecarlo::InitKind::Qss, 0.0, cfg.moments.y0};
    const auto mc = montecarlo::run_planar_ensemble(sys, sim, init);
    auto csv = out.open("moments.csv", {"quantity", "analytic", "series", "mc_mean", "mc_se", "z_score"});
    for (const auto& r : moment_table(sys, mc, cfg.moments.y0, cfg.moments.t)) {
        csv.row({std::string(r.quantity), r.analytic, r.series, r.mc_mean, r.mc_se, r.z_score()});
    }
    if (cfg.dump_paths) {
        auto paths = out.open("paths.csv", {"path", "t", "x", "y"});
        const std::uint64_t n = std::min<std::uint64_t>(10, sim.n_paths);
        for (std::uint64_t p = 0; p < n; ++p) {
            for (const auto& s : montecarlo::simulate_planar_path(sys, sim, init, p, cfg.path_stride)) {
                paths.row({p, s.t, s.x, s.y});
            }
        }
    }
    out.report();
    return 0;
}

/// Var(y) minus the leading-order variance, one row per (c, d) slope set.
inline int cmd_variance(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto sys = cfg.make_system();
    auto sim = detail::planar_sim(cfg, opt);
    sim.t_end = cfg.variance.t;
    detail::warn_coarse_step(sim, sys.epsilon());
    const double eps2 = sys.epsilon() * sys.epsilon();
    auto csv = out.open("variance.csv", {"c_left", "c_right", "d_left", "d_right", "n", "var_mc", "var_leading",
                                         "deviation", "ci_lo", "ci_hi", "contains_zero", "within_eps2", "mean_y_mc",
                                         "mean_y_se", "mean_y_analytic", "sliding_solution"});
    for (const auto& r : run_variance_rows(sys, cfg.variance.rows, sim)) {
        csv.row({r.slopes[0], r.slopes[1], r.slopes[2], r.slopes[3], r.mc.y.n, r.mc.y.variance(), r.leading,
                 r.deviation, r.deviation_ci.lo, r.deviation_ci.hi, r.deviation_ci.contains(0.0),
                 r.deviation_ci.lo >= -eps2 && r.deviation_ci.hi <= eps2, r.mc.y.mean, r.mc.y.std_error(), r.mean_y,
                 r.sliding});
    }
    if (!cfg.variance.symmetric_times.empty()) {
        auto sym = out.open("variance_symmetric.csv",
                            {"t", "n", "var_mc", "ci_lo", "ci_hi", "exact", "leading", "contains_exact"});
        for (const auto& r : run_symmetric_variance(sys, cfg.variance.symmetric_times, sim)) {
            sym.row({r.t, r.y.n, r.y.variance(), r.ci.lo, r.ci.hi, r.exact, r.leading, r.ci.contains(r.exact)});
        }
    }
    out.report();
    return 0;
}

/// Deterministic relay orbit: summary, sliding segments and one period of trajectory.
inline int cmd_relay_det(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto rs = canonical_relay(cfg.relay.zeta);
    const auto settings = relay_settings(cfg.relay.rtol, cfg.relay.atol);
    const auto orbit = filippov::find_periodic_orbit(rs, cfg.relay.x0, cfg.relay.transient, cfg.relay.tol, settings);
    auto summary = out.open("relay_orbit.csv", {"zeta", "period", "sliding_segments", "closure_error", "section_time",
                                                "section_x1", "section_x2", "section_x3"});
    summary.row({cfg.relay.zeta, orbit.period, static_cast<std::int64_t>(orbit.sliding_segment_count),
                 orbit.closure_error, orbit.section_time, orbit.section_point[0], orbit.section_point[1],
                 orbit.section_point[2]});
    auto seg = out.open("relay_segments.csv", {"index", "enter", "exit", "duration"});
    for (std::size_t i = 0; i < orbit.segment_times.size(); ++i) {
        const auto [a, b] = orbit.segment_times[i];
        seg.row({static_cast<std::uint64_t>(i), a - orbit.section_time, b - orbit.section_time, b - a});
    }
    const auto traj = filippov::integrate_relay(rs, orbit.section_point, orbit.period, settings);
    auto tr = out.open("relay_trajectory.csv", {"t", "x1", "x2", "x3", "mode"});
    for (const auto& p : traj.points) tr.row({p.t, p.x[0], p.x[1], p.x[2], std::string(filippov::to_string(p.mode))});
    out.report();
    return 0;
}

/// Oscillation-time quartiles of the noisy relay per noise level.
inline int cmd_relay_noise(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto rs = canonical_relay(cfg.relay.zeta);
    const auto orbit = filippov::find_periodic_orbit(rs, cfg.relay.x0, cfg.relay.transient, cfg.relay.tol,
                                                     relay_settings(cfg.relay.rtol, cfg.relay.atol));
    const auto sim = detail::relay_sim(cfg, opt);
    const auto rows =
        run_relay_noise(rs, cfg.relay.epsilons, sim, cfg.relay.x0, static_cast<int>(cfg.relay.debounce));
    auto csv = out.open("relay_noise.csv", {"epsilon", "sqrt_epsilon", "runs", "valid_runs", "q25", "median", "q75",
                                            "deterministic_period"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        const auto q = r.quartiles.value_or(montecarlo::Quartiles{nan, nan, nan});
        csv.row({r.epsilon, std::sqrt(r.epsilon), static_cast<std::uint64_t>(r.records.size()),
                 static_cast<std::uint64_t>(r.times.size()), q.q25, q.median, q.q75, orbit.period});
    }
    if (cfg.relay.dump_runs) {
        auto runs = out.open("relay_noise_runs.csv", {"epsilon", "run", "sign_changes", "oscillation_time"});
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.records.size(); ++i) {
                runs.row({r.epsilon, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(r.records[i].times.size()), r.records[i].oscillation_time});
            }
        }
    }
    out.report();
    return 0;
}

/// Exact mean escape time against its asymptotic form over the eps grid.
inline int cmd_escape(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    detail::Outputs out(cfg, opt);
    const auto sys = cfg.make_system();
    auto csv = out.open("escape.csv",
                        {"epsilon", "exact", "log_exact", "asymptotic", "log_asymptotic", "ratio", "degenerate"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : escape_table(sys, cfg.escape.epsilons, cfg.escape.x0, cfg.escape.x_b)) {
        csv.row({r.epsilon, r.result.exact, r.result.log_exact, r.result.asymptotic.value_or(nan),
                 r.result.log_asymptotic.value_or(nan), r.ratio.value_or(nan), r.result.degenerate});
    }
    out.report();
    return 0;
}

/// Runs the check suite; Monte Carlo sizes, seed and threads come from the config.
/// Returns 0 when every check passes.
inline int cmd_verify(const io::ExperimentConfig& cfg, const RunOptions& opt) {
    std::vector<verify::CheckResult> results;
    auto run = [&](verify::CheckResult r) {
        fmt::print("{} {}: {} [{:.1f} s]\n", r.passed ? "PASS" : "FAIL", r.name, r.detail, r.seconds);
        std::fflush(stdout);
        results.push_back(std::move(r));
    };
    run(verify::check_laplace());
    run(verify::check_q_series());
    run(verify::check_qss_normalization());
    run(verify::check_flux_identity());
    run(verify::check_q_function_oracle());
    run(verify::check_flux_integrals());
    run(verify::check_transition_density());
    run(verify::check_escape_time());
    if (!opt.quick) {
        const auto base = make_piecewise_linear({2.0, 1.0, 1.0, 0.0}, 0.01);
        auto sim = detail::planar_sim(cfg, opt);
        sim.t_end = 1.0;
        sim.snapshot_times = {0.1, 1.0};
        sim.keep_snapshot_samples = true;
        const auto rows = run_variance_rows(base, {{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0},
                                                   {0, 0, 0, 1}, {1, 1, 1, 1}},
                                            sim);
        run(verify::check_variance_rows(rows, base.epsilon()));
        run(verify::check_mean_y(rows));
        {
            // Euler-Maruyama at dt = 1e-4 biases <|x|> by about 1.6%, several standard errors at 1e5
            // paths, so the moment comparison uses a finer step over a shorter horizon.
            auto fine = sim;
            fine.dt = 2.5e-5;
            fine.t_end = 0.2;
            fine.snapshot_times.clear();
            fine.keep_snapshot_samples = false;
            fine.stream = 400;
            const auto mc = montecarlo::run_planar_ensemble(base, fine);
            run(verify::check_moments(moment_table(base, mc, 0.0, fine.t_end)));
        }
        run(verify::check_stationarity(rows[0].mc.x_snapshot_samples[0], rows[0].mc.x_snapshot_samples[1]));
        sim.snapshot_times.clear();
        sim.keep_snapshot_samples = false;
        run(verify::check_relaxation(base, sim));
        // same step bias: at dt = 1e-4 Var(y) at t = 1 comes out about 1% low, outside the interval
        const auto sym = make_piecewise_linear({1.0, 1.0, 1.0, 0.0}, 0.01);
        auto sym_sim = sim;
        sym_sim.dt = 2.5e-5;
        run(verify::check_symmetric_variance(run_symmetric_variance(sym, {0.1, 1.0}, sym_sim)));
        const auto rs = canonical_relay(cfg.relay.zeta);
        const auto orbit = verify::check_relay_orbit(rs, cfg.relay.x0, cfg.relay.transient, cfg.relay.tol,
                                                     cfg.relay.rtol, cfg.relay.atol);
        run(orbit.result);
        const auto relay_rows = run_relay_noise(rs, cfg.relay.epsilons, detail::relay_sim(cfg, opt), cfg.relay.x0,
                                                static_cast<int>(cfg.relay.debounce));
        run(verify::check_relay_noise(relay_rows, orbit.orbit.period));
    }
    detail::Outputs out(cfg, opt);
    auto csv = out.open("verify.csv", {"check", "passed", "detail"});
    bool all = true;
    for (const auto& r : results) {
        csv.row({r.name, r.passed, r.detail});
        all = all && r.passed;
    }
    out.report();
    fmt::print("{} of {} checks passed\n",
               std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; }), results.size());
    return all ? 0 : 1;
}

}  // namespace slidenoise::app
