#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "slidenoise/core.hpp"
#include "slidenoise/numerics/quadrature.hpp"

namespace slidenoise::analytic {

/// Quasi-steady-state density of x,
///   p(x) = (K_eps / eps) exp(q(x) / eps),  q(x) = 2 a_L x + c_L x^2 (x <= 0),  -2 a_R x + c_R x^2 (x >= 0),
/// normalized numerically over [-truncation, truncation].
class QssDensity {
public:
    explicit QssDensity(const PiecewiseLinearSystem& sys, double truncation = -1.0)
        : sys_(sys), truncation_(truncation > 0.0 ? truncation : drift_bound_radius(sys)) {
        const double mass = integrate_weighted([](double) { return 1.0; });
        K_eps_ = sys_.epsilon() / mass;
    }

    [[nodiscard]] const PiecewiseLinearSystem& system() const noexcept { return sys_; }
    [[nodiscard]] double K_eps() const noexcept { return K_eps_; }
    [[nodiscard]] double truncation() const noexcept { return truncation_; }

    /// Exponent q(x), without the 1/eps.
    [[nodiscard]] double exponent(double x) const noexcept {
        if (x <= 0.0) return 2.0 * sys_.a_left() * x + sys_.c_left() * x * x;
        return -2.0 * sys_.a_right() * x + sys_.c_right() * x * x;
    }

    [[nodiscard]] double log_pdf(double x) const {
        check_domain(x);
        return std::log(K_eps_ / sys_.epsilon()) + exponent(x) / sys_.epsilon();
    }

    [[nodiscard]] double pdf(double x) const {
        check_domain(x);
        return K_eps_ / sys_.epsilon() * std::exp(exponent(x) / sys_.epsilon());
    }

    /// E[f(x)] under the density.
    template <class F>
    [[nodiscard]] double expectation(F&& f) const {
        return K_eps_ / sys_.epsilon() * integrate_weighted(std::forward<F>(f));
    }

    /// Mass on x < 0.
    [[nodiscard]] double left_mass() const {
        auto g = [&](double x) { return std::exp(exponent(x) / sys_.epsilon()); };
        const auto pts = breakpoints(true, false);
        return K_eps_ / sys_.epsilon() * numerics::integrate(g, pts, {1e-300, 1e-12, 4000}).value;
    }

private:
    void check_domain(double x) const {
        if (!(std::abs(x) <= truncation_)) throw Error(Errc::OutOfDomain, "x beyond the truncation radius");
    }

    [[nodiscard]] std::vector<double> breakpoints(bool left, bool right) const {
        const double eps = sys_.epsilon();
        std::vector<double> pts;
        if (left) {
            pts.push_back(-truncation_);
            for (double k : {200.0, 50.0, 10.0, 2.0}) {
                const double p = -k * eps / sys_.a_left();
                if (p > -truncation_) pts.push_back(p);
            }
        }
        pts.push_back(0.0);
        if (right) {
            for (double k : {2.0, 10.0, 50.0, 200.0}) {
                const double p = k * eps / sys_.a_right();
                if (p < truncation_) pts.push_back(p);
            }
            pts.push_back(truncation_);
        }
        return pts;
    }

    template <class F>
    double integrate_weighted(F&& f) const {
        const double eps = sys_.epsilon();
        auto g = [&](double x) { return f(x) * std::exp(exponent(x) / eps); };
        // absolute floor for moments that cancel to zero, e.g. <x> in the symmetric case
        return numerics::integrate(g, breakpoints(true, true), {1e-14 * eps * eps, 1e-12, 4000}).value;
    }

    PiecewiseLinearSystem sys_;
    double truncation_;
    double K_eps_ = 0.0;
};

inline double qss_pdf(double x, const QssDensity& q) { return q.pdf(x); }

struct QssMoments {
    double mean_sgn = 0.0;
    double mean_x = 0.0;
    double mean_xsgn = 0.0;
};

inline QssMoments qss_moments(const QssDensity& q) {
    return {q.expectation([](double x) { return sgn(x); }), q.expectation([](double x) { return x; }),
            q.expectation([](double x) { return std::abs(x); })};
}

/// Two-term small-eps expansion of K_eps.
inline double qss_normalization_series(const PiecewiseLinearSystem& sys) {
    const double aL = sys.a_left(), aR = sys.a_right();
    const double s = aL + aR;
    return 2.0 * aL * aR / s -
           (aL * aL * aL * sys.c_right() + aR * aR * aR * sys.c_left()) * sys.epsilon() / (aL * aR * s * s);
}

/// Small-eps expansions of the three qss moments.
inline QssMoments qss_moments_series(const PiecewiseLinearSystem& sys) {
    const double aL = sys.a_left(), aR = sys.a_right(), eps = sys.epsilon();
    const double s = aL + aR;
    QssMoments m;
    m.mean_sgn = (aL - aR) / s + (aL * aL * sys.c_right() - aR * aR * sys.c_left()) * eps / (aL * aR * s * s);
    m.mean_x = (aL - aR) * eps / (2.0 * aL * aR);
    m.mean_xsgn = (aL * aL + aR * aR) * eps / (2.0 * aL * aR * s);
    return m;
}

}  // namespace slidenoise::analytic
