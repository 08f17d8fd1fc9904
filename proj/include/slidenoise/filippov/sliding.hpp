#pragma once

#include <cmath>
#include <string_view>

#include "slidenoise/core.hpp"

namespace slidenoise::filippov {

enum class Mode { FlowLeft, FlowRight, Sliding };

constexpr std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::FlowLeft: return "left";
        case Mode::FlowRight: return "right";
        case Mode::Sliding: return "sliding";
    }
    return "?";
}

struct SlidingState {
    Vec3 x{};
    Mode mode = Mode::FlowLeft;
    double t = 0.0;
};

/// Weight q with (1 - q) n.fL + q n.fR = 0, i.e. the convex combination tangent to the manifold.
template <class V>
double filippov_weight(const V& f_left, const V& f_right, const V& normal) {
    double sl = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < normal.size(); ++i) {
        sl += normal[i] * f_left[i];
        sr += normal[i] * f_right[i];
    }
    if (!(sl > 0.0) || !(sr < 0.0)) throw Error(Errc::NotAttracting, "both fields must point toward the manifold");
    return sl / (sl - sr);
}

/// Planar model: q = a_L / (a_L + a_R).
inline double filippov_weight(const PiecewiseLinearSystem& sys) {
    return filippov_weight(std::array<double, 1>{sys.a_left()}, std::array<double, 1>{-sys.a_right()},
                           std::array<double, 1>{1.0});
}

/// Smooth field on the side selected by `mode` (u = +1 on the left, -1 on the right).
inline Vec3 relay_branch_field(const Vec3& x, const RelaySystem& rs, Mode mode) {
    const double u = mode == Mode::FlowLeft ? 1.0 : -1.0;
    return rs.A * x + u * rs.B;
}

/// A x - B sgn(C^T x), defined off the manifold.
inline Vec3 relay_vector_field(const Vec3& x, const RelaySystem& rs) {
    const double s = dot(rs.C, x);
    if (s == 0.0) throw Error(Errc::OnManifold, "state lies on the switching manifold; use the sliding field");
    return relay_branch_field(x, rs, s < 0.0 ? Mode::FlowLeft : Mode::FlowRight);
}

struct SlidingField {
    Vec3 field{};
    double u_eq = 0.0;
};

/// Equivalent control u_eq = -(C^T A x) / (C^T B), without the exit check.
inline double equivalent_control(const Vec3& x, const RelaySystem& rs) {
    return -dot(rs.C, rs.A * x) / dot(rs.C, rs.B);
}

inline SlidingField relay_sliding_field(const Vec3& x, const RelaySystem& rs) {
    const double u = equivalent_control(x, rs);
    if (!(std::abs(u) < 1.0)) throw Error(Errc::SlidingExit, "equivalent control left (-1, 1)");
    return {rs.A * x + u * rs.B, u};
}

/// Right-hand side used by the integrator in a given mode; no exit checks.
inline Vec3 relay_mode_field(const Vec3& x, const RelaySystem& rs, Mode mode) {
    if (mode == Mode::Sliding) return rs.A * x + equivalent_control(x, rs) * rs.B;
    return relay_branch_field(x, rs, mode);
}

}  // namespace slidenoise::filippov
