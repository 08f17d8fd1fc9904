#pragma once

// Brute-force reference computations, deliberately independent of the closed forms they check.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "slidenoise/analytic/first_passage.hpp"
#include "slidenoise/core.hpp"
#include "slidenoise/numerics/quadrature.hpp"

namespace slidenoise::verify {

/// int_0^inf db int_0^t h(tau, b + alpha, a_R) h(t - tau, b + beta, a_L) dtau by nested quadrature.
inline double convolution_nested(double t, double alpha, double beta, double a_left, double a_right, double eps,
                                 double rel_tol = 1e-9) {
    const double amax = std::max(a_left, a_right);
    const double b_max = amax * t + 16.0 * std::sqrt(eps * t) + 1e-12;
    const numerics::QuadratureSettings inner{1e-300, rel_tol * 0.1, 4000};
    auto in_b = [&](double b) {
        auto f = [&](double tau) {
            return analytic::first_passage_density(tau, b + alpha, a_right, eps) *
                   analytic::first_passage_density(t - tau, b + beta, a_left, eps);
        };
        auto g = [&](double u) {
            const double tau = 0.5 * t * (1.0 - std::cos(std::numbers::pi * u));
            if (tau <= 0.0 || tau >= t) return 0.0;
            return f(tau) * 0.5 * t * std::numbers::pi * std::sin(std::numbers::pi * u);
        };
        return numerics::integrate(g, std::vector<double>{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}, inner).value;
    };
    std::vector<double> pts{0.0};
    for (double f : {0.02, 0.1, 0.3}) pts.push_back(f * b_max);
    pts.push_back(b_max);
    return numerics::integrate(in_b, pts, {1e-300, rel_tol, 4000}).value;
}

/// Four-case transition density assembled from convolution_nested.
inline double transition_pdf_nested(double x, double t, double x0, double a_left, double a_right, double eps) {
    if (x <= 0.0) {
        const double w = 2.0 / eps * std::exp(2.0 * a_left * x / eps);
        if (x0 <= 0.0) {
            return w * convolution_nested(t, 0.0, -x - x0, a_left, a_right, eps) +
                   analytic::absorbed_density(x, t, a_left, x0, eps);
        }
        return w * convolution_nested(t, x0, -x, a_left, a_right, eps);
    }
    const double w = 2.0 / eps * std::exp(-2.0 * a_right * x / eps);
    if (x0 <= 0.0) return w * convolution_nested(t, x, -x0, a_left, a_right, eps);
    return w * convolution_nested(t, x + x0, 0.0, a_left, a_right, eps) +
           analytic::absorbed_density(x, t, -a_right, x0, eps);
}

/// Q(t, a) straight from its triple-integral definition.
inline double q_function_triple(double t, double a, double K, double eps, double rel_tol = 1e-10) {
    if (t == 0.0) return 0.0;
    const double x_max = 25.0 * eps / a;
    const numerics::QuadratureSettings qs{1e-300, rel_tol, 4000};
    auto survival_deficit = [&](double x, double u) {
        // int_0^u h(s, x, a) ds, peak near s = x / a
        std::vector<double> pts{0.0};
        const double peak = x / a;
        for (double f : {0.25, 1.0, 3.0}) {
            if (f * peak < u) pts.push_back(f * peak);
        }
        pts.push_back(u);
        return numerics::integrate([&](double s) { return s > 0.0 ? analytic::first_passage_density(s, x, a, eps) : 0.0; },
                                   pts, qs)
            .value;
    };
    auto over_x = [&](double u) {
        if (u <= 0.0) return 0.0;
        auto fx = [&](double x) { return K * std::exp(-2.0 * a * x / eps) * survival_deficit(x, u); };
        return numerics::integrate(fx, std::vector<double>{0.0, 0.2 * x_max, x_max}, qs).value;
    };
    return numerics::integrate([&](double u) { return (t - u) * over_x(u); },
                               std::vector<double>{0.0, 0.01 * t, 0.1 * t, t}, {1e-300, rel_tol * 10, 4000})
        .value;
}

/// int_0^inf e^{-lambda t} h(t, z, mu) dt by quadrature.
inline double first_passage_laplace_numeric(double lambda, double z, double mu, double eps) {
    const double peak = std::abs(z) / std::max(std::abs(mu), 1e-300);
    auto f = [&](double t) {
        return t > 0.0 ? std::exp(-lambda * t) * analytic::first_passage_density(t, z, mu, eps) : 0.0;
    };
    std::vector<double> pts{0.0, 0.1 * peak, 0.5 * peak, peak, 2.0 * peak, 5.0 * peak, 20.0 * peak};
    const double tail_end = 20.0 * peak + 200.0 / lambda;
    pts.push_back(tail_end);
    return numerics::integrate(f, pts, {1e-300, 1e-12, 4000}).value;
}

/// Mean exit time from [-x_b, x_b] by second-order finite differences on n interior nodes,
///   (eps / 2) T'' + phi(x) T' = -1,  T(+-x_b) = 0,  solved with the Thomas algorithm.
/// Roundoff grows like n^2 exp(2 dU / eps), so keep n modest when the barrier is high.
inline double escape_time_fd(double x0, const PiecewiseLinearSystem& sys, double x_b, std::size_t n = 4000) {
    const double h = 2.0 * x_b / static_cast<double>(n + 1);
    const double eps = sys.epsilon();
    std::vector<double> lower(n), diag(n), upper(n), rhs(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -x_b + static_cast<double>(i + 1) * h;
        const double diff = 0.5 * eps / (h * h);
        const double conv = sys.phi(x) / (2.0 * h);
        lower[i] = diff - conv;
        diag[i] = -2.0 * diff;
        upper[i] = diff + conv;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> T(n);
    T[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) T[i] = (rhs[i] - upper[i] * T[i + 1]) / diag[i];
    // linear interpolation at x0
    const double pos = (x0 + x_b) / h - 1.0;
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(n - 2)));
    const double frac = pos - static_cast<double>(i);
    return T[i] + frac * (T[i + 1] - T[i]);
}

}  // namespace slidenoise::verify
