#pragma once

#include <cmath>
#include <numbers>

#include "slidenoise/analytic/first_passage.hpp"
#include "slidenoise/core.hpp"
#include "slidenoise/numerics/quadrature.hpp"
#include "slidenoise/numerics/special.hpp"

namespace slidenoise::analytic {

/// A value together with whether t lay inside the quasi-stationary time window.
struct WindowedValue {
    double value = 0.0;
    bool in_window = true;
};

/// Filippov sliding speed along the manifold.
inline double sliding_slope(const PiecewiseLinearSystem& sys) {
    return (sys.a_right() * sys.b_left() + sys.a_left() * sys.b_right()) / (sys.a_left() + sys.a_right());
}

inline double sliding_solution(const PiecewiseLinearSystem& sys, double y0, double t) {
    if (!(t >= 0.0)) throw Error(Errc::BadTime, "time must be nonnegative");
    return y0 + t * sliding_slope(sys);
}

/// O(eps t) drift of E[y(t)] away from the sliding solution.
inline double mean_y_correction(const PiecewiseLinearSystem& sys, double t) {
    const double aL = sys.a_left(), aR = sys.a_right();
    const double s = aL + aR;
    const double num = (aL * aL * sys.d_right() - aR * aR * sys.d_left()) * s -
                       (aL * aL * sys.c_right() - aR * aR * sys.c_left()) * (sys.b_left() - sys.b_right());
    return sys.epsilon() * t * num / (2.0 * aL * aR * s * s);
}

inline WindowedValue mean_y(const PiecewiseLinearSystem& sys, double y0, double t, ValidityWindow window = {}) {
    return {sliding_solution(sys, y0, t) + mean_y_correction(sys, t), window.contains(t, sys.epsilon())};
}

inline double variance_y_leading(const PiecewiseLinearSystem& sys, double t) {
    if (!(t > 0.0)) throw Error(Errc::BadTime, "time must be positive");
    const double db = sys.b_left() - sys.b_right();
    const double s = sys.a_left() + sys.a_right();
    return sys.epsilon() * sys.kappa() * t + db * db * sys.epsilon() * t / (s * s);
}

namespace detail {

// sign(p) * exp(log|p| + log_scale) * erfc(z), safe for large z.
inline double poly_times_erfc(double p, double z) {
    if (p == 0.0) return 0.0;
    return std::copysign(numerics::exp_times_erfc(std::log(std::abs(p)), z), p);
}

// Below this value of a sqrt(t) / sqrt(2 eps) the closed form loses digits to cancellation.
inline constexpr double q_closed_form_threshold = 0.3;

// Q / K through a single integral over first-passage times, used for small arguments.
inline double q_over_k_integral(double t, double a, double eps) {
    auto g = [&](double s) {
        const double rate = a * std::sqrt(s / (2.0 * eps));
        const double d = t - s;
        return d * d *
               (std::sqrt(eps / (2.0 * std::numbers::pi * s)) * std::exp(-rate * rate) - 0.5 * a * std::erfc(rate));
    };
    return 0.5 * numerics::integrate_endpoint_singular(g, 0.0, t, {1e-300, 1e-13, 2000}).value;
}

inline double q_over_k_closed(double t, double a, double eps) {
    const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a;
    const double z = a * std::sqrt(t / (2.0 * eps));
    const double smooth = eps * t * t / (4.0 * a) - eps * eps * t / (4.0 * a3) + eps * eps * eps / (4.0 * a5);
    const double gauss_poly = std::sqrt(t / (2.0 * std::numbers::pi)) *
                              (std::sqrt(eps) * t * t / 6.0 + std::pow(eps, 1.5) * t / (3.0 * a2) -
                               std::pow(eps, 2.5) / (2.0 * a4));
    const double erfc_poly = a * t * t * t / 12.0 + smooth;
    return smooth + gauss_poly * std::exp(-z * z) - poly_times_erfc(erfc_poly, z);
}

}  // namespace detail

/// Q(t, a) = int_0^t (t-u) int_0^inf K e^{-2ax/eps} int_0^u h(s, x, a) ds dx du, for explicit K.
inline double q_function(double t, double a, double K, double eps) {
    if (!(t >= 0.0)) throw Error(Errc::BadTime, "time must be nonnegative");
    if (!(a > 0.0)) throw Error(Errc::NonAttracting, "a must be positive");
    if (!(eps > 0.0)) throw Error(Errc::BadNoise, "epsilon must be positive");
    if (t == 0.0) return 0.0;
    const double z = a * std::sqrt(t / (2.0 * eps));
    if (z < detail::q_closed_form_threshold) return K * detail::q_over_k_integral(t, a, eps);
    return K * detail::q_over_k_closed(t, a, eps);
}

/// Q with K = 2 a_L a_R / (a_L + a_R) and eps taken from the system.
inline double q_function(double t, double a, const PiecewiseLinearSystem& sys) {
    const double K = 2.0 * sys.a_left() * sys.a_right() / (sys.a_left() + sys.a_right());
    return q_function(t, a, K, sys.epsilon());
}

/// Two-term expansion of (Q(t, a_L) + Q(t, a_R)) / eps.
inline double q_sum_series(double t, const PiecewiseLinearSystem& sys) {
    const double aL = sys.a_left(), aR = sys.a_right();
    return 0.5 * t * t -
           (aL * aL * aL + aR * aR * aR) * sys.epsilon() * t / (2.0 * aL * aL * aR * aR * (aL + aR));
}

/// Var(y(t)) for a_L = a_R = a and x(0) stationary; exact for piecewise-constant drift.
inline double variance_y_exact_symmetric(double a, double b_left, double b_right, double eps, double t,
                                         double kappa = 0.0) {
    if (!(t >= 0.0)) throw Error(Errc::BadTime, "time must be nonnegative");
    if (!(a > 0.0)) throw Error(Errc::NonAttracting, "a must be positive");
    if (!(eps > 0.0)) throw Error(Errc::BadNoise, "epsilon must be positive");
    if (t == 0.0) return 0.0;
    const double db = b_left - b_right;
    const double z = a * std::sqrt(t / (2.0 * eps));
    double bracket = 0.0;
    if (z < detail::q_closed_form_threshold) {
        // t^2 - 4 Q / eps with K = a; no cancellation for small z.
        bracket = t * t - 4.0 * a * detail::q_over_k_integral(t, a, eps) / eps;
    } else {
        const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2;
        const double smooth = eps * t / a2 - eps * eps / a4;
        const double gauss_poly =
            std::sqrt(2.0 * t / (std::numbers::pi * eps)) * (eps * eps / a3 - 2.0 * eps * t / (3.0 * a) - a * t * t / 3.0);
        const double erfc_poly = eps * eps / a4 - eps * t / a2 + t * t + a2 * t * t * t / (3.0 * eps);
        bracket = smooth + gauss_poly * std::exp(-z * z) + detail::poly_times_erfc(erfc_poly, z);
    }
    return 0.25 * db * db * bracket + eps * kappa * t;
}

inline double variance_y_exact_symmetric(const PiecewiseLinearSystem& sys, double t) {
    if (!sys.symmetric()) throw Error(Errc::Config, "exact variance needs a_left == a_right");
    return variance_y_exact_symmetric(sys.a_left(), sys.b_left(), sys.b_right(), sys.epsilon(), t, sys.kappa());
}

/// int_0^t int_0^t <sgn x(s) sgn x(u)> ds du to O(eps), x(0) stationary.
inline WindowedValue sgn_autocorrelation_integral(const PiecewiseLinearSystem& sys, double t,
                                                  ValidityWindow window = {}) {
    if (!(t >= 0.0)) throw Error(Errc::BadTime, "time must be nonnegative");
    const double aL = sys.a_left(), aR = sys.a_right();
    const double s2 = (aL + aR) * (aL + aR);
    return {(aL - aR) * (aL - aR) * t * t / s2 + 4.0 * sys.epsilon() * t / s2,
            t >= window.lower(sys.epsilon())};
}

}  // namespace slidenoise::analytic
