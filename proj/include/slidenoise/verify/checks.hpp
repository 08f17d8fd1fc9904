#pragma once

// Pass/fail checks over the analytic formulas, their oracles and the Monte Carlo ensembles.
// Each check returns a record instead of throwing so a report can list all of them.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "slidenoise/analytic/first_passage.hpp"
#include "slidenoise/analytic/qss.hpp"
#include "slidenoise/analytic/sliding.hpp"
#include "slidenoise/analytic/transition.hpp"
#include "slidenoise/app/experiments.hpp"
#include "slidenoise/filippov/relay.hpp"
#include "slidenoise/montecarlo/stats.hpp"
#include "slidenoise/verify/oracles.hpp"

namespace slidenoise::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double rel_err(double value, double target) {
    return std::abs(value - target) / std::max(std::abs(target), 1e-300);
}

/// Time integrals of the flux out of x > 0 against their closed forms, six (a_L, a_R, eps) cases.
inline CheckResult check_flux_integrals() {
    Stopwatch sw;
    double worst = 0.0;
    std::string where;
    for (auto [aL, aR] : std::vector<std::pair<double, double>>{{2, 1}, {3, 2}, {1, 4}}) {
        for (double eps : {0.02, 0.01}) {
            const analytic::TransitionDensity td(aL, aR, eps);
            const auto li = analytic::boundary_flux_integrals(td);
            const double first = -(aL - aR) / (2.0 * (aL + aR));
            const double second = -eps * (aL - aR) / (2.0 * aL * aR * (aL + aR));
            const double e = std::max(rel_err(li.flux_integral, first), rel_err(li.moment_integral, second));
            if (e > worst) {
                worst = e;
                where = fmt::format("(a_L, a_R, eps) = ({}, {}, {})", aL, aR, eps);
            }
        }
    }
    const double s = sw.seconds();
    return {"flux integrals", worst < 1e-3 && s < 120.0,
            fmt::format("max relative error {:.3e} at {} (limit 1e-3 within 120 s)", worst, where), s};
}

/// Closed-form Q against its triple-integral definition on a 3x3x3 grid.
inline CheckResult check_q_function_oracle() {
    Stopwatch sw;
    const double K = 4.0 / 3.0;
    double worst = 0.0;
    std::string where;
    for (double t : {0.01, 0.1, 1.0}) {
        for (double a : {0.5, 1.0, 2.0}) {
            for (double eps : {0.01, 0.02, 0.05}) {
                const double e = rel_err(analytic::q_function(t, a, K, eps), q_function_triple(t, a, K, eps));
                if (e > worst) {
                    worst = e;
                    where = fmt::format("(t, a, eps) = ({}, {}, {})", t, a, eps);
                }
            }
        }
    }
    const double s = sw.seconds();
    return {"Q closed form vs quadrature", worst < 1e-6 && s < 60.0,
            fmt::format("max relative error {:.3e} at {} (limit 1e-6 within 60 s)", worst, where), s};
}

/// Sample Var(y) minus the leading-order variance: the deviation sits in its 95% interval and the
/// interval lies inside [-eps^2, eps^2]. Whether the interval also holds 0 is reported only; rows
/// with d != 0 carry a resolvable O(eps^2) term.
inline CheckResult check_variance_rows(const std::vector<app::VarianceRow>& rows, double eps) {
    Stopwatch sw;
    bool ok = !rows.empty();
    std::string detail;
    for (const auto& r : rows) {
        const bool in_ci = r.deviation_ci.contains(r.deviation);
        const bool inside = r.deviation_ci.lo >= -eps * eps && r.deviation_ci.hi <= eps * eps;
        ok = ok && in_ci && inside;
        detail += fmt::format("[c=({},{}) d=({},{}): dev {:.2e} CI [{:.2e}, {:.2e}]{}{}{}] ", r.slopes[0], r.slopes[1],
                              r.slopes[2], r.slopes[3], r.deviation, r.deviation_ci.lo, r.deviation_ci.hi,
                              r.deviation_ci.contains(0.0) ? "" : " excludes 0", in_ci ? "" : " misses estimate",
                              inside ? "" : " exceeds eps^2");
    }
    return {"variance deviation table", ok, detail, sw.seconds()};
}

inline CheckResult check_symmetric_variance(const std::vector<app::SymmetricVarianceRow>& rows) {
    bool ok = !rows.empty();
    std::string detail;
    for (const auto& r : rows) {
        const bool in = r.ci.contains(r.exact);
        ok = ok && in;
        detail += fmt::format("[t={}: MC {:.5e} CI [{:.5e}, {:.5e}] exact {:.5e}{}] ", r.t, r.y.variance(), r.ci.lo,
                              r.ci.hi, r.exact, in ? "" : " outside");
    }
    return {"exact symmetric variance", ok, detail, 0.0};
}

/// Mean of y against the O(eps) corrected mean for a row with a slope, and against the sliding
/// solution for the row without slopes.
inline CheckResult check_mean_y(const std::vector<app::VarianceRow>& rows) {
    const app::VarianceRow* plain = nullptr;
    const app::VarianceRow* sloped = nullptr;
    for (const auto& r : rows) {
        if (r.slopes == std::array<double, 4>{0, 0, 0, 0}) plain = &r;
        if (r.slopes == std::array<double, 4>{0, 1, 0, 0}) sloped = &r;
    }
    if (!plain || !sloped) return {"mean of y", false, "needs rows (0,0,0,0) and (0,1,0,0)", 0.0};
    const double z_slope = (sloped->mc.y.mean - sloped->mean_y) / sloped->mc.y.std_error();
    const double z_plain = (plain->mc.y.mean - plain->sliding) / plain->mc.y.std_error();
    const bool ok = std::abs(z_slope) <= 3.0 && std::abs(z_plain) <= 3.0;
    return {"mean of y", ok,
            fmt::format("c_R=1: MC {:.6f} vs {:.6f} (z = {:.2f}); c=d=0: MC {:.6f} vs {:.6f} (z = {:.2f})",
                        sloped->mc.y.mean, sloped->mean_y, z_slope, plain->mc.y.mean, plain->sliding, z_plain),
            0.0};
}

/// Normalization, continuity at 0, Fokker-Planck residual order and relaxation to the steady state.
inline CheckResult check_transition_density() {
    Stopwatch sw;
    const double eps = 0.01;
    const analytic::TransitionDensity td(2.0, 1.0, eps);
    const std::vector<double> times{eps / 20, eps / 2, eps, 10 * eps, 100 * eps};

    double mass_err = 0.0;
    double jump = 0.0;
    for (double t : times) {
        for (double x0 : {-3 * eps, 0.0, 3 * eps}) {
            const double r = analytic::transition_support_radius(t, x0, td);
            mass_err = std::max(mass_err, std::abs(analytic::transition_mass(-r, r, t, x0, td) - 1.0));
            const double left = analytic::transition_pdf_branch(0.0, t, x0, analytic::Side::Left, td);
            const double right = analytic::transition_pdf_branch(0.0, t, x0, analytic::Side::Right, td);
            jump = std::max(jump, rel_err(left, right));
        }
    }

    // residual of p_t = -(phi p)_x + (eps/2) p_xx with central differences, time step h^2
    double worst_ratio_dev = 0.0;
    std::string ratios;
    for (double x : {-0.01, 0.01, 0.03}) {
        std::vector<double> res;
        for (double h : {eps / 10, eps / 20, eps / 40}) {
            const double t = eps, x0 = 0.02, ht = h * h;
            auto p = [&](double xx, double tt) { return analytic::transition_pdf(xx, tt, x0, td); };
            const double pt = (p(x, t + ht) - p(x, t - ht)) / (2 * ht);
            const double px = (p(x + h, t) - p(x - h, t)) / (2 * h);
            const double pxx = (p(x + h, t) - 2 * p(x, t) + p(x - h, t)) / (h * h);
            const double phi = x < 0 ? 2.0 : -1.0;
            res.push_back(std::abs(pt + phi * px - 0.5 * eps * pxx));
        }
        for (std::size_t i = 0; i + 1 < res.size(); ++i) {
            const double ratio = res[i] / res[i + 1];
            ratios += fmt::format("{:.2f} ", ratio);
            worst_ratio_dev = std::max(worst_ratio_dev, std::abs(std::log2(ratio) - 2.0));
        }
    }

    // start at x0 = 0.02; the gap to the steady state should shrink monotonically
    const auto grid = app::linear_grid(-0.1, 0.1, 801);
    std::vector<double> gaps;
    for (double t : times) gaps.push_back(app::density_slice(td, 0.02, t, grid).sup_gap_scaled);
    const bool monotone = std::is_sorted(gaps.rbegin(), gaps.rend());
    const double gap_10 = gaps[3];

    const bool ok = mass_err < 1e-6 && jump < 1e-8 && worst_ratio_dev < 0.5 && monotone && gap_10 < 1e-3;
    return {"transition density", ok,
            fmt::format("max |mass-1| {:.2e}; jump at 0 {:.2e}; residual ratios per halving {}; gaps/(K/eps) "
                        "{:.2e} {:.2e} {:.2e} {:.2e} {:.2e}{}",
                        mass_err, jump, ratios, gaps[0], gaps[1], gaps[2], gaps[3], gaps[4],
                        monotone ? "" : " (not monotone)"),
            sw.seconds()};
}

/// Exact mean escape time against the small-eps asymptotic form, (a_L, a_R) = (2, 1), x_b = 1.
inline CheckResult check_escape_time() {
    Stopwatch sw;
    const auto sys = make_piecewise_linear({2.0, 1.0}, 0.2);
    const auto rows = app::escape_table(sys, {0.2, 0.1, 0.05}, 0.0, 1.0);
    std::vector<double> dev;
    std::string detail;
    for (const auto& r : rows) {
        dev.push_back(std::abs(*r.ratio - 1.0));
        detail += fmt::format("eps={}: ratio {:.6f}; ", r.epsilon, *r.ratio);
    }
    const bool ok = dev[2] < 0.25 && dev[1] < dev[0] && dev[2] < dev[1];
    return {"escape time asymptotics", ok, detail, sw.seconds()};
}

struct RelayOrbitCheck {
    CheckResult result;
    filippov::PeriodicOrbitResult orbit;
};

/// Periodic orbit of the relay system: 12 sliding segments, closure and period stable when the
/// integrator tolerances are halved.
inline RelayOrbitCheck check_relay_orbit(const RelaySystem& rs, const Vec3& x0, double transient, double tol,
                                         double rtol, double atol) {
    Stopwatch sw;
    RelayOrbitCheck out;
    out.orbit = filippov::find_periodic_orbit(rs, x0, transient, tol, app::relay_settings(rtol, atol));
    const auto fine = filippov::find_periodic_orbit(rs, x0, transient, tol, app::relay_settings(rtol / 2, atol / 2));
    const double drift = std::abs(fine.period - out.orbit.period);
    const bool ok = out.orbit.sliding_segment_count == 12 && out.orbit.closure_error < 1e-6 && drift < 1e-6;
    out.result = {"relay periodic orbit", ok,
                  fmt::format("period {:.10f}, {} sliding segments, closure {:.2e}, period change under halved "
                              "tolerance {:.2e}",
                              out.orbit.period, out.orbit.sliding_segment_count, out.orbit.closure_error, drift),
                  sw.seconds()};
    return out;
}

/// Medians of the noisy oscillation time fall with eps, and the largest eps beats the period.
inline CheckResult check_relay_noise(const std::vector<app::RelayNoiseRow>& rows, double period) {
    std::vector<std::pair<double, double>> med;
    std::string detail;
    for (const auto& r : rows) {
        if (r.epsilon <= 0.0 || !r.quartiles) continue;
        med.emplace_back(r.epsilon, r.quartiles->median);
        detail += fmt::format("eps={:.3g}: median {:.4f} ({} runs); ", r.epsilon, r.quartiles->median, r.times.size());
    }
    std::sort(med.begin(), med.end());
    bool monotone = med.size() >= 2;
    for (std::size_t i = 1; i < med.size(); ++i) monotone = monotone && med[i].second < med[i - 1].second;
    const bool below = !med.empty() && med.back().second < period;
    detail += fmt::format("deterministic period {:.4f}", period);
    return {"noisy relay oscillation time", monotone && below, detail, 0.0};
}

// ---- further invariants ---------------------------------------------------------------------

inline CheckResult check_laplace() {
    double worst = 0.0;
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (auto [z, mu] : std::vector<std::pair<double, double>>{{0.1, -1.0}, {-0.05, 2.0}, {0.02, 0.5}}) {
            const double eps = 0.01;
            worst = std::max(worst, rel_err(first_passage_laplace_numeric(lambda, z, mu, eps),
                                             analytic::first_passage_laplace(lambda, z, mu, eps)));
        }
    }
    return {"first-passage Laplace transform", worst < 1e-6, fmt::format("max relative error {:.2e}", worst), 0.0};
}

/// (Q(a_L) + Q(a_R)) / eps minus its two-term expansion should shrink like eps^2.
inline CheckResult check_q_series() {
    auto residual = [](double eps) {
        const auto sys = make_piecewise_linear({2.0, 1.0}, eps);
        const double t = 1.0;
        return std::abs((analytic::q_function(t, 2.0, sys) + analytic::q_function(t, 1.0, sys)) / eps -
                        analytic::q_sum_series(t, sys));
    };
    const double r1 = residual(0.02), r2 = residual(0.01), r3 = residual(0.005);
    const double o1 = std::log2(r1 / r2), o2 = std::log2(r2 / r3);
    const bool ok = std::abs(o1 - 2.0) < 0.3 && std::abs(o2 - 2.0) < 0.3;
    return {"Q series order", ok, fmt::format("observed orders {:.2f}, {:.2f}", o1, o2), 0.0};
}

/// K_eps from numerical normalization against its expansion, error order in eps.
inline CheckResult check_qss_normalization() {
    auto gap = [](double eps) {
        const auto sys = make_piecewise_linear({2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0}, eps);
        return std::abs(analytic::QssDensity(sys).K_eps() - analytic::qss_normalization_series(sys));
    };
    const double g1 = gap(0.02), g2 = gap(0.01);
    const double order = std::log2(g1 / g2);
    return {"qss normalization series", std::abs(order - 2.0) < 0.3,
            fmt::format("|K_num - K_series| {:.2e} at eps=0.01, observed order {:.2f}", g2, order), 0.0};
}

/// d/dt of the mass on x > 0 equals minus the flux, and that mass tends to 1/2 as t -> 0.
inline CheckResult check_flux_identity() {
    const double eps = 0.01;
    const analytic::TransitionDensity td(2.0, 1.0, eps);
    auto right_mass = [&](double t) {
        return analytic::transition_mass(0.0, analytic::transition_support_radius(t, 0.0, td), t, 0.0, td);
    };
    double worst = 0.0;
    for (double t : {0.2 * eps, eps, 5 * eps}) {
        const double dt = 1e-3 * t;
        const double deriv = (right_mass(t + dt) - right_mass(t - dt)) / (2 * dt);
        worst = std::max(worst, rel_err(deriv, -analytic::boundary_flux(t, td)));
    }
    const double half = std::abs(right_mass(1e-6 * eps) - 0.5);
    return {"flux identity", worst < 1e-4 && half < 1e-2,
            fmt::format("max relative error {:.2e}; |mass(0+) - 1/2| {:.2e}", worst, half), 0.0};
}

inline CheckResult check_moments(const std::vector<app::MomentRow>& rows) {
    bool ok = true;
    std::string detail;
    for (const auto& r : rows) {
        const double z = r.z_score();
        ok = ok && std::abs(z) <= 3.0;
        detail += fmt::format("{}: z = {:.2f}; ", r.quantity, z);
    }
    return {"moments vs Monte Carlo", ok, detail, 0.0};
}

/// Two-sample KS distance between x(t1) and x(t2) for a stationary start.
inline CheckResult check_stationarity(const std::vector<double>& early, const std::vector<double>& late) {
    const double d = montecarlo::ks_distance(early, late);
    const double crit = montecarlo::ks_critical_value(early.size(), late.size(), 0.01);
    return {"stationarity of x", d < crit, fmt::format("KS distance {:.4f}, 99% critical value {:.4f}", d, crit), 0.0};
}

/// Mean of x(10 eps) from x(0) = 5 eps, against the qss mean.
inline CheckResult check_relaxation(const PiecewiseLinearSystem& sys, montecarlo::SimConfig cfg) {
    const double eps = sys.epsilon();
    cfg.t_end = 10 * eps;
    cfg.snapshot_times.clear();
    cfg.stream = 300;
    const auto mc = montecarlo::run_planar_ensemble(sys, cfg, {montecarlo::InitKind::Fixed, 5 * eps, 0.0});
    const double target = analytic::qss_moments(analytic::QssDensity(sys)).mean_x;
    const double rel = std::abs(mc.x.mean - target) / std::abs(target);
    return {"relaxation of x", rel < 0.1,
            fmt::format("mean x(10 eps) {:.5e} vs qss {:.5e}, relative gap {:.3f}", mc.x.mean, target, rel), 0.0};
}

}  // namespace slidenoise::verify
