#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "slidenoise/error.hpp"

namespace slidenoise::numerics {

struct QuadratureSettings {
    double abs_tol = 0.0;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

namespace detail {

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod_panel(F& f, double a, double b) {
    using rule = boost::math::quadrature::gauss_kronrod<double, 21>;
    static const auto& x = rule::abscissa();
    static const auto& wk = rule::weights();
    static const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = wk[0] * fc;
    double g = 0.0;  // 10-point Gauss rule has no centre node
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fsum = f(c - h * x[i]) + f(c + h * x[i]);
        k += wk[i] * fsum;
        if (i % 2 == 1) g += wg[i / 2] * fsum;
    }
    return Panel{a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace detail

/// Globally adaptive 21-point Gauss-Kronrod quadrature over the panels delimited by `points`.
/// Panels with the largest error estimate are bisected until the total error meets the tolerance.
template <class F>
QuadratureResult integrate(F&& f, const std::vector<double>& points, const QuadratureSettings& qs = {}) {
    std::priority_queue<detail::Panel> queue;
    double total = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i + 1] == points[i]) continue;
        auto p = detail::kronrod_panel(f, points[i], points[i + 1]);
        total += p.value;
        err += p.error;
        queue.push(p);
    }
    int subdivisions = 0;
    double settled = 0.0;
    double settled_err = 0.0;
    while (err > std::max(qs.abs_tol, qs.rel_tol * std::abs(total)) && !queue.empty()) {
        if (subdivisions >= qs.max_subdivisions) {
            std::ostringstream os;
            os << "tolerance not met after " << subdivisions << " subdivisions (value " << total << ", error "
               << err << ")";
            throw Error(Errc::QuadratureFailure, os.str());
        }
        const auto worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval exhausted at machine precision; keep its estimate and move on.
            settled += worst.value;
            settled_err += worst.error;
            err -= worst.error;
            continue;
        }
        auto left = detail::kronrod_panel(f, worst.a, mid);
        auto right = detail::kronrod_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    double sum = settled;
    double esum = settled_err;
    while (!queue.empty()) {
        sum += queue.top().value;
        esum += queue.top().error;
        queue.pop();
    }
    return {sum, esum, subdivisions};
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSettings& qs = {}) {
    return integrate(std::forward<F>(f), std::vector<double>{a, b}, qs);
}

/// Integral over [a, b] of an integrand with inverse-square-root endpoint behaviour,
/// via tau = a + (b - a)(1 - cos(pi u)) / 2 which makes such endpoints smooth.
template <class F>
QuadratureResult integrate_endpoint_singular(F&& f, double a, double b, const QuadratureSettings& qs = {}) {
    const double half = 0.5 * (b - a);
    auto g = [&](double u) {
        const double tau = a + half * (1.0 - std::cos(std::numbers::pi * u));
        const double jac = half * std::numbers::pi * std::sin(std::numbers::pi * u);
        if (jac == 0.0) return 0.0;
        return f(tau) * jac;
    };
    return integrate(g, 0.0, 1.0, qs);
}

}  // namespace slidenoise::numerics
