#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "slidenoise/error.hpp"

namespace slidenoise {

inline constexpr double sgn(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Coefficients of the planar drift near the switching manifold x = 0:
///   phi(x) = a_left + c_left x  (x < 0),   -a_right + c_right x  (x > 0)
///   psi(x) = b_left + d_left x  (x < 0),    b_right + d_right x  (x > 0)
struct PiecewiseLinearCoeffs {
    double a_left = 1.0;
    double a_right = 1.0;
    double b_left = 0.0;
    double b_right = 0.0;
    double c_left = 0.0;
    double c_right = 0.0;
    double d_left = 0.0;
    double d_right = 0.0;

    friend bool operator==(const PiecewiseLinearCoeffs&, const PiecewiseLinearCoeffs&) = default;
};

/// Planar stochastic system dx = phi(x) dt + sqrt(eps) dW1, dy = psi(x) dt + sqrt(eps kappa) dW2.
/// Immutable once built; construct through make_piecewise_linear.
class PiecewiseLinearSystem {
public:
    [[nodiscard]] const PiecewiseLinearCoeffs& coeffs() const noexcept { return c_; }
    [[nodiscard]] double a_left() const noexcept { return c_.a_left; }
    [[nodiscard]] double a_right() const noexcept { return c_.a_right; }
    [[nodiscard]] double b_left() const noexcept { return c_.b_left; }
    [[nodiscard]] double b_right() const noexcept { return c_.b_right; }
    [[nodiscard]] double c_left() const noexcept { return c_.c_left; }
    [[nodiscard]] double c_right() const noexcept { return c_.c_right; }
    [[nodiscard]] double d_left() const noexcept { return c_.d_left; }
    [[nodiscard]] double d_right() const noexcept { return c_.d_right; }
    [[nodiscard]] double epsilon() const noexcept { return eps_; }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }

    /// Normal drift. At x == 0 both branches are averaged (sgn(0) = 0).
    [[nodiscard]] double phi(double x) const noexcept {
        if (x < 0.0) return c_.a_left + c_.c_left * x;
        if (x > 0.0) return -c_.a_right + c_.c_right * x;
        return 0.5 * (c_.a_left - c_.a_right);
    }

    /// Tangential drift, same convention at x == 0.
    [[nodiscard]] double psi(double x) const noexcept {
        if (x < 0.0) return c_.b_left + c_.d_left * x;
        if (x > 0.0) return c_.b_right + c_.d_right * x;
        return 0.5 * (c_.b_left + c_.b_right);
    }

    [[nodiscard]] bool piecewise_constant() const noexcept {
        return c_.c_left == 0.0 && c_.c_right == 0.0 && c_.d_left == 0.0 && c_.d_right == 0.0;
    }
    [[nodiscard]] bool symmetric() const noexcept { return c_.a_left == c_.a_right; }

    /// Copy with a different noise intensity, validated the same way.
    [[nodiscard]] PiecewiseLinearSystem with_epsilon(double eps) const;

private:
    PiecewiseLinearSystem(const PiecewiseLinearCoeffs& c, double eps, double kappa)
        : c_(c), eps_(eps), kappa_(kappa) {}
    friend PiecewiseLinearSystem make_piecewise_linear(const PiecewiseLinearCoeffs&, double, double);

    PiecewiseLinearCoeffs c_;
    double eps_;
    double kappa_;
};

inline PiecewiseLinearSystem make_piecewise_linear(const PiecewiseLinearCoeffs& c, double epsilon,
                                                   double kappa = 0.0) {
    if (!(c.a_left > 0.0) || !(c.a_right > 0.0)) {
        std::ostringstream os;
        os << "a_left and a_right must be positive (got " << c.a_left << ", " << c.a_right << ")";
        throw Error(Errc::NonAttracting, os.str());
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(Errc::BadNoise, "epsilon must be positive");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw Error(Errc::BadNoise, "kappa must be nonnegative");
    for (double v : {c.b_left, c.b_right, c.c_left, c.c_right, c.d_left, c.d_right}) {
        if (!std::isfinite(v)) throw Error(Errc::Config, "coefficients must be finite");
    }
    return PiecewiseLinearSystem(c, epsilon, kappa);
}

inline PiecewiseLinearSystem PiecewiseLinearSystem::with_epsilon(double eps) const {
    return make_piecewise_linear(c_, eps, kappa_);
}

/// Largest x_b <= x_cap with |phi| >= min(a_left, a_right) / 2 on [-x_b, x_b].
inline double drift_bound_radius(const PiecewiseLinearSystem& sys, double x_cap = 1.0) {
    const double half_min = 0.5 * std::min(sys.a_left(), sys.a_right());
    double xb = x_cap;
    // a_left + c_left x >= half_min for x in [-xb, 0)
    if (sys.c_left() > 0.0) xb = std::min(xb, (sys.a_left() - half_min) / sys.c_left());
    // -a_right + c_right x <= -half_min for x in (0, xb]
    if (sys.c_right() > 0.0) xb = std::min(xb, (sys.a_right() - half_min) / sys.c_right());
    return xb;
}

/// The drift pair restricted to the radius where it points toward the manifold.
struct DriftField {
    std::function<double(double)> phi;
    std::function<double(double)> psi;
    double x_b = 1.0;
};

inline DriftField drift_field(const PiecewiseLinearSystem& sys, double x_cap = 1.0) {
    return DriftField{[sys](double x) { return sys.phi(x); }, [sys](double x) { return sys.psi(x); },
                      drift_bound_radius(sys, x_cap)};
}

/// Time window [eps^(1-delta), eps^(-M)] over which x is treated as quasi-stationary.
struct ValidityWindow {
    double delta = 0.1;
    double M = 2.0;

    [[nodiscard]] double lower(double eps) const { return std::pow(eps, 1.0 - delta); }
    [[nodiscard]] double upper(double eps) const { return std::pow(eps, -M); }
    [[nodiscard]] bool contains(double t, double eps) const { return t >= lower(eps) && t <= upper(eps); }
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 operator*(const Mat3& m, const Vec3& v) { return {dot(m[0], v), dot(m[1], v), dot(m[2], v)}; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Linear plant with relay feedback u = -sgn(C^T x).
struct RelaySystem {
    Mat3 A{};
    Vec3 B{};
    Vec3 C{};
    double zeta = 0.0;
};

/// Third-order companion-form plant with B = (1, -2, 1), C = e1.
inline RelaySystem canonical_relay(double zeta) {
    RelaySystem rs;
    rs.zeta = zeta;
    rs.A = Mat3{Vec3{-20.0 * zeta - 1.0 / 20.0, 1.0, 0.0}, Vec3{-zeta - 100.0, 0.0, 1.0}, Vec3{-5.0, 0.0, 0.0}};
    rs.B = {1.0, -2.0, 1.0};
    rs.C = {1.0, 0.0, 0.0};
    return rs;
}

}  // namespace slidenoise
