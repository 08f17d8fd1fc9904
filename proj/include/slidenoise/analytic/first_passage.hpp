#pragma once

#include <cmath>
#include <numbers>

#include "slidenoise/error.hpp"

namespace slidenoise::analytic {

inline void require_positive_time(double t) {
    if (!(t > 0.0)) throw Error(Errc::BadTime, "time must be positive");
}

/// Density of the first hitting time of 0 for dx = -mu dt + sqrt(eps) dW started at x0.
inline double first_passage_density(double t, double x0, double mu, double eps) {
    require_positive_time(t);
    if (x0 == 0.0) return 0.0;
    const double d = x0 - mu * t;
    return std::abs(x0) / std::sqrt(2.0 * std::numbers::pi * eps * t * t * t) * std::exp(-d * d / (2.0 * eps * t));
}

/// Laplace transform of first_passage_density in t, for lambda > 0.
inline double first_passage_laplace(double lambda, double z, double mu, double eps) {
    return std::exp((mu * z - std::sqrt(mu * mu + 2.0 * eps * lambda) * std::abs(z)) / eps);
}

/// Transition density of dx = mu dt + sqrt(eps) dW killed at 0 (method of images).
/// x and x0 must lie on the same side of 0.
inline double absorbed_density(double x, double t, double mu, double x0, double eps) {
    require_positive_time(t);
    if (x * x0 < 0.0) throw Error(Errc::OutOfDomain, "x and x0 must lie on the same side of the boundary");
    const double two_eps_t = 2.0 * eps * t;
    const double norm = 1.0 / std::sqrt(std::numbers::pi * two_eps_t);
    const double direct = x - x0 - mu * t;
    const double image = x + x0 - mu * t;
    return norm * (std::exp(-direct * direct / two_eps_t) -
                   std::exp(-2.0 * mu * x0 / eps - image * image / two_eps_t));
}

}  // namespace slidenoise::analytic
