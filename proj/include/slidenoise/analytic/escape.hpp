#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "slidenoise/core.hpp"
#include "slidenoise/numerics/quadrature.hpp"

namespace slidenoise::analytic {

/// U(x) = -int_0^x phi(y) dy for the piecewise-linear normal drift.
inline double potential_unchecked(double x, const PiecewiseLinearSystem& sys) {
    if (x < 0.0) return -(sys.a_left() * x + 0.5 * sys.c_left() * x * x);
    return sys.a_right() * x - 0.5 * sys.c_right() * x * x;
}

inline double potential(double x, const PiecewiseLinearSystem& sys, double x_b) {
    if (!(std::abs(x) <= x_b)) throw Error(Errc::OutOfDomain, "x outside [-x_b, x_b]");
    return potential_unchecked(x, sys);
}

inline double potential(double x, const PiecewiseLinearSystem& sys) {
    return potential(x, sys, drift_bound_radius(sys));
}

/// Small-eps form T ~ prefactor * exp(exponent / eps).
struct EscapeAsymptotics {
    double prefactor = 0.0;
    double exponent = 0.0;
    std::function<double(double)> potential;
};

struct EscapeTimeResult {
    double exact = 0.0;       // may be +inf when exp(log_exact) overflows
    double log_exact = 0.0;
    std::optional<double> asymptotic;  // empty when U(x_b) == U(-x_b)
    std::optional<double> log_asymptotic;
    bool degenerate = false;
    EscapeAsymptotics asymptotics;
};

/// Mean exit time from [-x_b, x_b] starting at x0, from the double-integral solution of
///   (eps/2) T'' - U' T' = -1,  T(-x_b) = T(x_b) = 0,
/// with exp(2 U / eps) factored out so the quadrature never overflows.
inline EscapeTimeResult mean_escape_time(double x0, const PiecewiseLinearSystem& sys, double x_b) {
    if (!(x_b > 0.0)) throw Error(Errc::OutOfDomain, "x_b must be positive");
    if (!(std::abs(x0) < x_b)) throw Error(Errc::OutOfDomain, "x0 must lie strictly inside (-x_b, x_b)");
    if (x_b > drift_bound_radius(sys, std::numeric_limits<double>::max()) * (1.0 + 1e-12)) {
        throw Error(Errc::OutOfDomain, "drift does not point toward the manifold on all of [-x_b, x_b]");
    }
    const double eps = sys.epsilon();
    auto U = [&](double x) { return potential_unchecked(x, sys); };
    const double u_lo = U(-x_b), u_hi = U(x_b);
    const double u_max = std::max(u_lo, u_hi);

    const numerics::QuadratureSettings inner{1e-300, 1e-12, 4000};
    const numerics::QuadratureSettings outer{1e-300, 1e-10, 4000};
    const double wl = eps / sys.a_left(), wr = eps / sys.a_right();
    auto panel_points = [&](double lo, double hi) {
        std::vector<double> pts{lo};
        for (double p : {-x_b + 3.0 * wl, -x_b + 30.0 * wl, -30.0 * wl, -3.0 * wl, 0.0, 3.0 * wr, 30.0 * wr,
                         x_b - 30.0 * wr, x_b - 3.0 * wr}) {
            if (p > lo && p < hi) pts.push_back(p);
        }
        pts.push_back(hi);
        std::sort(pts.begin(), pts.end());
        return pts;
    };
    auto inv_weight = [&](double y) { return std::exp(-2.0 * U(y) / eps); };
    auto I = [&](double z) {
        if (z <= -x_b) return 0.0;
        return numerics::integrate(inv_weight, panel_points(-x_b, z), inner).value;
    };
    auto E = [&](double z) { return std::exp(2.0 * (U(z) - u_max) / eps); };

    const auto full = panel_points(-x_b, x_b);
    const double den = numerics::integrate(E, full, outer).value;
    const double num = numerics::integrate([&](double z) { return E(z) * I(z); }, full, outer).value;
    const double C = num / den;
    const double body =
        numerics::integrate([&](double z) { return E(z) * (C - I(z)); }, panel_points(-x_b, x0), outer).value;

    EscapeTimeResult r;
    r.log_exact = std::log(2.0 / eps) + 2.0 * u_max / eps + std::log(body);
    r.exact = std::exp(r.log_exact);

    r.asymptotics.potential = [sys](double x) { return potential_unchecked(x, sys); };
    if (u_lo == u_hi) {
        r.degenerate = true;
        return r;
    }
    const double a_sum = sys.a_left() + sys.a_right();
    const double a_prod = sys.a_left() * sys.a_right();
    // Exit happens over the lower of the two barriers.
    const double barrier = std::min(u_lo, u_hi);
    const double slope = u_hi < u_lo ? -sys.phi(x_b) : sys.phi(-x_b);
    r.asymptotics.prefactor = eps * a_sum / (2.0 * a_prod * slope);
    r.asymptotics.exponent = 2.0 * barrier;
    r.log_asymptotic = std::log(r.asymptotics.prefactor) + r.asymptotics.exponent / eps;
    r.asymptotic = std::exp(*r.log_asymptotic);
    return r;
}

}  // namespace slidenoise::analytic
