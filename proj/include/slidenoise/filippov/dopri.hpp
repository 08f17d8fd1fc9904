#pragma once

#include <algorithm>
#include <cmath>

#include "slidenoise/core.hpp"

namespace slidenoise::filippov {

struct StepResult {
    Vec3 x{};
    Vec3 error{};
};

/// One Dormand-Prince 5(4) step from (t, x) with step h.
template <class F>
StepResult dopri5_step(F&& f, const Vec3& x, double h) {
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                     b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    const Vec3 k1 = f(x);
    const Vec3 k2 = f(x + (h * a21) * k1);
    const Vec3 k3 = f(x + h * (a31 * k1 + a32 * k2));
    const Vec3 k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec3 k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec3 k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec3 xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec3 k7 = f(xn);
    return {xn, h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)};
}

/// RMS error relative to atol + rtol * max(|x|, |x_new|).
inline double scaled_error(const Vec3& x, const StepResult& s, double atol, double rtol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(s.x[i]));
        const double r = s.error[i] / sc;
        sum += r * r;
    }
    return std::sqrt(sum / 3.0);
}

/// Next step size from the error norm of an order-5 pair.
inline double next_step(double h, double err) {
    const double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
    return h * std::clamp(factor, 0.2, 5.0);
}

}  // namespace slidenoise::filippov
