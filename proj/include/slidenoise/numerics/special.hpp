#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace slidenoise::numerics {

/// Scaled complementary error function exp(z^2) erfc(z).
/// Direct product below z = 10, asymptotic series above (relative error < 1e-16 there).
inline double erfcx(double z) {
    if (z < 10.0) return std::exp(z * z) * std::erfc(z);
    const double inv2z2 = 1.0 / (2.0 * z * z);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        term *= -(2.0 * k - 1.0) * inv2z2;
        sum += term;
    }
    return sum / (z * std::sqrt(std::numbers::pi));
}

/// exp(log_prefactor) * erfc(z), evaluated without intermediate under/overflow when z > 5.
inline double exp_times_erfc(double log_prefactor, double z) {
    if (z <= 5.0) return std::exp(log_prefactor) * std::erfc(z);
    return std::exp(log_prefactor - z * z) * erfcx(z);
}

/// F_k(r) = int_0^inf s^k exp(-s^2 - 2 r s) ds for k = 0, 1, 2 and r >= 0.
inline std::array<double, 3> scaled_half_line_moments(double r) {
    if (r < 6.0) {
        const double f0 = 0.5 * std::sqrt(std::numbers::pi) * erfcx(r);
        const double f1 = 0.5 - r * f0;
        const double f2 = 0.5 * (f0 - 2.0 * r * f1);
        return {f0, f1, f2};
    }
    // F_k(r) = sum_j (-1)^j (k+2j)! / (j! (2r)^(k+2j+1)); asymptotic, terms shrink until j ~ r^2.
    std::array<double, 3> out{};
    const double two_r = 2.0 * r;
    for (int k = 0; k < 3; ++k) {
        double fact = 1.0;  // (k+2j)!
        for (int i = 2; i <= k; ++i) fact *= i;
        double jfact = 1.0;
        double pow_r = std::pow(two_r, k + 1);
        double sum = 0.0;
        for (int j = 0; j < 40; ++j) {
            if (j > 0) {
                fact *= static_cast<double>(k + 2 * j - 1) * (k + 2 * j);
                jfact *= j;
                pow_r *= two_r * two_r;
            }
            const double term = fact / (jfact * pow_r);
            sum += (j % 2 == 0) ? term : -term;
            if (term < 1e-18 * std::abs(sum)) break;
        }
        out[k] = sum;
    }
    return out;
}

/// M_k = int_0^inf b^k exp(-(b - m)^2 / (2 v)) db for k = 0, 1, 2 (v > 0).
inline std::array<double, 3> gaussian_half_line_moments(double m, double v) {
    const double s = std::sqrt(2.0 * v);
    const double r = -m / s;
    if (r <= 0.0) {
        const double m0 = std::sqrt(std::numbers::pi * v / 2.0) * std::erfc(r);
        const double m1 = v * std::exp(-r * r) + m * m0;
        const double m2 = m * m1 + v * m0;
        return {m0, m1, m2};
    }
    const auto f = scaled_half_line_moments(r);
    const double e = std::exp(-r * r);
    return {e * s * f[0], e * s * s * f[1], e * s * s * s * f[2]};
}

}  // namespace slidenoise::numerics
