#pragma once

// Experiment drivers shared by the CLI subcommands and the verification checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "slidenoise/analytic/escape.hpp"
#include "slidenoise/analytic/qss.hpp"
#include "slidenoise/analytic/sliding.hpp"
#include "slidenoise/analytic/transition.hpp"
#include "slidenoise/core.hpp"
#include "slidenoise/filippov/relay.hpp"
#include "slidenoise/montecarlo/planar.hpp"
#include "slidenoise/montecarlo/relay_em.hpp"
#include "slidenoise/montecarlo/stats.hpp"

namespace slidenoise::app {

// ---- transition density slices ------------------------------------------------------------

struct DensitySlice {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> p;
    std::vector<double> p_steady;
    double mass = 0.0;
    double sup_gap_scaled = 0.0;  // max |p - p_steady| / (K / eps) over the grid
};

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

inline DensitySlice density_slice(const analytic::TransitionDensity& td, double x0, double t,
                                  const std::vector<double>& grid) {
    DensitySlice s;
    s.t = t;
    s.x = grid;
    const double scale = td.stationary_constant() / td.epsilon;
    for (double x : grid) {
        const double p = analytic::transition_pdf(x, t, x0, td);
        const double ps = analytic::steady_state_pdf(x, td.a_left, td.a_right, td.epsilon);
        s.p.push_back(p);
        s.p_steady.push_back(ps);
        s.sup_gap_scaled = std::max(s.sup_gap_scaled, std::abs(p - ps) / scale);
    }
    const double r = analytic::transition_support_radius(t, x0, td);
    s.mass = analytic::transition_mass(-r, r, t, x0, td);
    return s;
}

// ---- planar ensembles ---------------------------------------------------------------------

struct VarianceRow {
    std::array<double, 4> slopes{};  // c_left, c_right, d_left, d_right
    montecarlo::PlanarEnsembleResult mc;
    double leading = 0.0;
    montecarlo::Interval variance_ci;
    montecarlo::Interval deviation_ci;
    double deviation = 0.0;
    double mean_y = 0.0;
    double sliding = 0.0;
};

inline PiecewiseLinearSystem with_slopes(const PiecewiseLinearSystem& base, const std::array<double, 4>& s) {
    PiecewiseLinearCoeffs c = base.coeffs();
    c.c_left = s[0];
    c.c_right = s[1];
    c.d_left = s[2];
    c.d_right = s[3];
    return make_piecewise_linear(c, base.epsilon(), base.kappa());
}

/// One ensemble per (c, d) row, x(0) drawn from the quasi-steady state, y(0) = y0.
/// Every row uses its own RNG stream tag.
inline std::vector<VarianceRow> run_variance_rows(const PiecewiseLinearSystem& base,
                                                  const std::vector<std::array<double, 4>>& rows,
                                                  montecarlo::SimConfig cfg, double y0 = 0.0) {
    std::vector<VarianceRow> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto sys = with_slopes(base, rows[i]);
        cfg.stream = static_cast<std::uint32_t>(100 + i);
        VarianceRow r;
        r.slopes = rows[i];
        r.mc = montecarlo::run_planar_ensemble(sys, cfg, {montecarlo::InitKind::Qss, 0.0, y0});
        r.leading = analytic::variance_y_leading(sys, cfg.t_end);
        r.variance_ci = montecarlo::variance_confidence_interval(r.mc.y);
        r.deviation = r.mc.y.variance() - r.leading;
        r.deviation_ci = {r.variance_ci.lo - r.leading, r.variance_ci.hi - r.leading};
        r.mean_y = analytic::mean_y(sys, y0, cfg.t_end).value;
        r.sliding = analytic::sliding_solution(sys, y0, cfg.t_end);
        out.push_back(std::move(r));
    }
    return out;
}

struct SymmetricVarianceRow {
    double t = 0.0;
    montecarlo::EnsembleStats y;
    double exact = 0.0;
    double leading = 0.0;
    montecarlo::Interval ci;
};

inline std::vector<SymmetricVarianceRow> run_symmetric_variance(const PiecewiseLinearSystem& sys,
                                                                const std::vector<double>& times,
                                                                montecarlo::SimConfig cfg) {
    std::vector<SymmetricVarianceRow> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        cfg.t_end = times[i];
        cfg.stream = static_cast<std::uint32_t>(200 + i);
        SymmetricVarianceRow r;
        r.t = times[i];
        r.y = montecarlo::run_planar_ensemble(sys, cfg).y;
        r.exact = analytic::variance_y_exact_symmetric(sys, times[i]);
        r.leading = analytic::variance_y_leading(sys, times[i]);
        r.ci = montecarlo::variance_confidence_interval(r.y);
        out.push_back(r);
    }
    return out;
}

struct MomentRow {
    const char* quantity = "";
    double analytic = 0.0;
    double series = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;

    [[nodiscard]] double z_score() const {
        return mc_se > 0.0 ? (mc_mean - analytic) / mc_se : (mc_mean == analytic ? 0.0 : INFINITY);
    }
};

/// Analytic moments against one ensemble started in the quasi-steady state.
inline std::vector<MomentRow> moment_table(const PiecewiseLinearSystem& sys, const montecarlo::PlanarEnsembleResult& mc,
                                           double y0, double t) {
    const analytic::QssDensity q(sys);
    const auto m = analytic::qss_moments(q);
    const auto ms = analytic::qss_moments_series(sys);
    std::vector<MomentRow> rows{
        {"sgn_x", m.mean_sgn, ms.mean_sgn, mc.sgn_x.mean, mc.sgn_x.std_error()},
        {"x", m.mean_x, ms.mean_x, mc.x.mean, mc.x.std_error()},
        {"x_sgn_x", m.mean_xsgn, ms.mean_xsgn, mc.x_sgn_x.mean, mc.x_sgn_x.std_error()},
        {"y", analytic::mean_y(sys, y0, t).value, analytic::sliding_solution(sys, y0, t), mc.y.mean, mc.y.std_error()},
    };
    if (sys.piecewise_constant()) {
        const double v = analytic::sgn_autocorrelation_integral(sys, t).value;
        rows.push_back({"sgn_integral_sq", v, v, mc.sgn_integral_sq.mean, mc.sgn_integral_sq.std_error()});
    }
    return rows;
}

// ---- escape -------------------------------------------------------------------------------

struct EscapeRow {
    double epsilon = 0.0;
    analytic::EscapeTimeResult result;
    std::optional<double> ratio;  // exact / asymptotic
};

inline std::vector<EscapeRow> escape_table(const PiecewiseLinearSystem& sys, const std::vector<double>& epsilons,
                                           double x0, double x_b) {
    std::vector<EscapeRow> out;
    for (double eps : epsilons) {
        EscapeRow r;
        r.epsilon = eps;
        r.result = analytic::mean_escape_time(x0, sys.with_epsilon(eps), x_b);
        if (r.result.log_asymptotic) r.ratio = std::exp(r.result.log_exact - *r.result.log_asymptotic);
        out.push_back(std::move(r));
    }
    return out;
}

// ---- relay --------------------------------------------------------------------------------

struct RelayNoiseRow {
    double epsilon = 0.0;
    std::vector<montecarlo::OscillationRecord> records;
    std::vector<double> times;  // oscillation times of runs with at least three sign changes
    std::optional<montecarlo::Quartiles> quartiles;
};

inline std::vector<RelayNoiseRow> run_relay_noise(const RelaySystem& rs, const std::vector<double>& epsilons,
                                                  const montecarlo::SimConfig& cfg, const Vec3& x0, int debounce) {
    std::vector<RelayNoiseRow> out;
    for (double eps : epsilons) {
        RelayNoiseRow r;
        r.epsilon = eps;
        r.records = montecarlo::run_relay_ensemble(rs, eps, cfg, x0, debounce);
        for (const auto& rec : r.records) {
            if (std::isfinite(rec.oscillation_time)) r.times.push_back(rec.oscillation_time);
        }
        if (!r.times.empty()) r.quartiles = montecarlo::quartile_summary(r.times);
        out.push_back(std::move(r));
    }
    return out;
}

inline filippov::RelayIntegratorSettings relay_settings(double rtol, double atol) {
    filippov::RelayIntegratorSettings s;
    s.rtol = rtol;
    s.atol = atol;
    return s;
}

}  // namespace slidenoise::app
