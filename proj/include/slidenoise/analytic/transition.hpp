#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "slidenoise/analytic/first_passage.hpp"
#include "slidenoise/core.hpp"
#include "slidenoise/numerics/quadrature.hpp"
#include "slidenoise/numerics/special.hpp"

namespace slidenoise::analytic {

/// Transition density p(x, t | x0) of Brownian motion with two-valued drift
///   dx = (a_left for x < 0, -a_right for x > 0) dt + sqrt(eps) dW.
struct TransitionDensity {
    double a_left = 1.0;
    double a_right = 1.0;
    double epsilon = 0.01;
    numerics::QuadratureSettings quadrature{1e-18, 1e-11, 4000};

    TransitionDensity() = default;
    TransitionDensity(double aL, double aR, double eps, numerics::QuadratureSettings qs = {1e-18, 1e-11, 4000})
        : a_left(aL), a_right(aR), epsilon(eps), quadrature(qs) {
        if (!(aL > 0.0) || !(aR > 0.0)) throw Error(Errc::NonAttracting, "drift magnitudes must be positive");
        if (!(eps > 0.0)) throw Error(Errc::BadNoise, "epsilon must be positive");
    }
    explicit TransitionDensity(const PiecewiseLinearSystem& sys)
        : TransitionDensity(sys.a_left(), sys.a_right(), sys.epsilon()) {}

    [[nodiscard]] double stationary_constant() const { return 2.0 * a_left * a_right / (a_left + a_right); }
};

enum class Side { Left, Right };

namespace detail {

/// Integrand, after the b-integral has been done in closed form, of
///   int_0^inf db int_0^t h(tau, b + alpha, mu1) h(t - tau, b + beta, mu2) dtau.
/// For fixed tau the two Gaussian factors combine into one Gaussian in b, so the b-integral
/// reduces to half-line Gaussian moments.
inline double convolution_kernel(double tau, double t, double alpha, double beta, double mu1, double mu2,
                                 double eps) {
    const double s = t - tau;
    if (!(tau > 0.0) || !(s > 0.0)) return 0.0;
    const double m1 = mu1 * tau - alpha;
    const double m2 = mu2 * s - beta;
    const double v = eps * tau * s / t;
    const double m = (m1 * s + m2 * tau) / t;
    const double gap = m1 - m2;
    const double outer = std::exp(-gap * gap / (2.0 * eps * t));
    if (outer == 0.0) return 0.0;
    const auto mom = numerics::gaussian_half_line_moments(m, v);
    const double poly = mom[2] + (alpha + beta) * mom[1] + alpha * beta * mom[0];
    const double ts = tau * s;
    return outer * poly / (2.0 * std::numbers::pi * eps * ts * std::sqrt(ts));
}

inline double b_convolution(double t, double alpha, double beta, const TransitionDensity& td) {
    auto f = [&](double tau) {
        return convolution_kernel(tau, t, alpha, beta, td.a_right, td.a_left, td.epsilon);
    };
    return numerics::integrate_endpoint_singular(f, 0.0, t, td.quadrature).value;
}

}  // namespace detail

/// One branch of the four-case density. `side` selects the formula valid for x <= 0 (Left)
/// or x >= 0 (Right); both agree at x = 0.
inline double transition_pdf_branch(double x, double t, double x0, Side side, const TransitionDensity& td) {
    require_positive_time(t);
    const double eps = td.epsilon;
    if (side == Side::Left) {
        if (x > 0.0) throw Error(Errc::OutOfDomain, "left branch needs x <= 0");
        const double weight = 2.0 / eps * std::exp(2.0 * td.a_left * x / eps);
        if (x0 <= 0.0) {
            return weight * detail::b_convolution(t, 0.0, -x - x0, td) +
                   absorbed_density(x, t, td.a_left, x0, eps);
        }
        return weight * detail::b_convolution(t, x0, -x, td);
    }
    if (x < 0.0) throw Error(Errc::OutOfDomain, "right branch needs x >= 0");
    const double weight = 2.0 / eps * std::exp(-2.0 * td.a_right * x / eps);
    if (x0 <= 0.0) return weight * detail::b_convolution(t, x, -x0, td);
    return weight * detail::b_convolution(t, x + x0, 0.0, td) + absorbed_density(x, t, -td.a_right, x0, eps);
}

inline double transition_pdf(double x, double t, double x0, const TransitionDensity& td) {
    return std::max(0.0, transition_pdf_branch(x, t, x0, x <= 0.0 ? Side::Left : Side::Right, td));
}

/// Stationary density of the two-valued-drift process (piecewise-constant drift only).
inline double steady_state_pdf(double x, double a_left, double a_right, double eps) {
    const double K = 2.0 * a_left * a_right / (a_left + a_right);
    if (x < 0.0) return K / eps * std::exp(2.0 * a_left * x / eps);
    return K / eps * std::exp(-2.0 * a_right * x / eps);
}

inline double steady_state_pdf(double x, const PiecewiseLinearSystem& sys) {
    return steady_state_pdf(x, sys.a_left(), sys.a_right(), sys.epsilon());
}

/// Half-width of an x-window outside which p(., t | x0) is negligible.
inline double transition_support_radius(double t, double x0, const TransitionDensity& td) {
    const double amin = std::min(td.a_left, td.a_right);
    const double amax = std::max(td.a_left, td.a_right);
    return std::abs(x0) + 40.0 * td.epsilon / amin + 12.0 * std::sqrt(td.epsilon * t) + amax * t;
}

/// int_lo^hi p(x, t | x0) dx with breakpoints at 0 and x0.
inline double transition_mass(double lo, double hi, double t, double x0, const TransitionDensity& td,
                              numerics::QuadratureSettings qs = {1e-14, 1e-10, 4000}) {
    std::vector<double> pts{lo};
    // at small t the mass sits within a few sqrt(eps t) of x0 and of 0
    const double w = 8.0 * std::sqrt(td.epsilon * t);
    for (double b : {0.0, x0, x0 - w, x0 + w, -w, w}) {
        if (b > lo && b < hi) pts.push_back(b);
    }
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto f = [&](double x) { return transition_pdf(x, t, x0, td); };
    return numerics::integrate(f, pts, qs).value;
}

namespace detail {

// g(x) = (eps/2) e^{2 a_R x / eps} p(x, t | 0) on x >= 0: the smooth factor left after removing the
// stationary exponential. The flux equals g'(0+), which avoids differencing two nearly equal terms.
inline double smooth_right_factor(double x, double t, const TransitionDensity& td) {
    return 0.5 * td.epsilon * std::exp(2.0 * td.a_right * x / td.epsilon) *
           transition_pdf_branch(x, t, 0.0, Side::Right, td);
}

// Four-point forward difference on offsets {0, h, 2h, 3h}, one Richardson step with h/2.
template <class F>
double forward_derivative(F&& f, double h) {
    const double f0 = f(0.0);
    auto stencil = [&](double step) {
        return (-11.0 * f0 + 18.0 * f(step) - 9.0 * f(2.0 * step) + 2.0 * f(3.0 * step)) / (6.0 * step);
    };
    return (8.0 * stencil(0.5 * h) - stencil(h)) / 7.0;
}

inline double flux_step(double t, const TransitionDensity& td) {
    return std::min(td.epsilon / 100.0, std::sqrt(td.epsilon * t) / 20.0);
}

}  // namespace detail

/// One-sided derivative d/dx p(0+, t | 0) by forward differencing with Richardson extrapolation.
/// h = eps/100, shrunk for t << eps where the density is narrower.
inline double pdf_right_derivative_at_zero(double t, const TransitionDensity& td) {
    require_positive_time(t);
    auto f = [&](double x) { return transition_pdf_branch(x, t, 0.0, Side::Right, td); };
    return detail::forward_derivative(f, detail::flux_step(t, td));
}

/// Probability flux a_right p(0, t | 0) + (eps / 2) dp/dx(0+, t | 0) out of x > 0.
/// Evaluated as the derivative of the smooth factor g above, which is algebraically the same.
inline double boundary_flux_numeric(double t, const TransitionDensity& td) {
    require_positive_time(t);
    auto g = [&](double x) { return detail::smooth_right_factor(x, t, td); };
    return detail::forward_derivative(g, detail::flux_step(t, td));
}

inline double boundary_flux(double t, const TransitionDensity& td) {
    require_positive_time(t);
    if (td.a_left == td.a_right) return 0.0;  // exact: by symmetry half the mass stays on each side
    return boundary_flux_numeric(t, td);
}

/// Closed-form Laplace transform in t of p(x, t | 0) for x >= 0.
inline double transition_laplace_positive(double x, double lambda, const TransitionDensity& td) {
    const double eps = td.epsilon;
    const double rl = std::sqrt(td.a_left * td.a_left + 2.0 * eps * lambda);
    const double rr = std::sqrt(td.a_right * td.a_right + 2.0 * eps * lambda);
    return 2.0 * std::exp(-(td.a_right + rr) * x / eps) / (rr - td.a_right + rl - td.a_left);
}

struct FluxIntegrals {
    double flux_integral = 0.0;       // int_0^T flux dt
    double moment_integral = 0.0;     // int_0^T t flux dt
    double truncation_time = 0.0;     // T
    double tail_bound = 0.0;          // |flux(T)| * eps / a_min^2, rough size of the discarded tail
};

/// Time integrals of boundary_flux truncated at T = 50 eps / min(a)^2.
inline FluxIntegrals boundary_flux_integrals(const TransitionDensity& td,
                                           numerics::QuadratureSettings qs = {1e-12, 1e-7, 2000}) {
    const double amin = std::min(td.a_left, td.a_right);
    const double T = 50.0 * td.epsilon / (amin * amin);
    const double root_T = std::sqrt(T);
    // t = u^2 removes the t^(-1/2) behaviour at t = 0. Below u_min the difference quotient loses
    // precision, so [0, u_min] is covered by the leading-order form flux ~ c / sqrt(t).
    const double u_min = 1e-4 * root_T;
    auto flux_u = [&](double u) { return 2.0 * u * boundary_flux(u * u, td); };
    auto moment_u = [&](double u) { return 2.0 * u * u * u * boundary_flux(u * u, td); };
    const std::vector<double> pts{u_min, 0.01 * root_T, 0.05 * root_T, 0.2 * root_T, 0.5 * root_T, root_T};
    const double head = u_min * flux_u(u_min);
    FluxIntegrals out;
    out.truncation_time = T;
    out.flux_integral = head + numerics::integrate(flux_u, pts, qs).value;
    out.moment_integral = head * u_min * u_min / 3.0 + numerics::integrate(moment_u, pts, qs).value;
    out.tail_bound = std::abs(boundary_flux(T, td)) * (1.0 + T) * td.epsilon / (amin * amin);
    return out;
}

}  // namespace slidenoise::analytic
