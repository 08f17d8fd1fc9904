#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include "slidenoise/error.hpp"

namespace slidenoise::montecarlo {

/// Streaming mean and sum of squared deviations (Welford); merge uses Chan's pairwise update.
struct EnsembleStats {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double ci_level = 0.95;

    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }

    void merge(const EnsembleStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            const double level = ci_level;
            *this = o;
            ci_level = level;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double nt = na + nb;
        const double d = o.mean - mean;
        mean += d * nb / nt;
        m2 += o.m2 + d * d * na * nb / nt;
        n += o.n;
    }

    [[nodiscard]] double variance() const { return n >= 2 ? m2 / static_cast<double>(n - 1) : 0.0; }
    [[nodiscard]] double std_error() const { return n >= 2 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// Two-sided standard-normal quantile for a confidence level.
inline double normal_critical_value(double level) {
    if (level <= 0.0) return 0.0;
    if (!(level < 1.0)) throw Error(Errc::Config, "confidence level must lie in [0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double v) const { return v >= lo && v <= hi; }
    [[nodiscard]] double half_width() const { return 0.5 * (hi - lo); }
};

inline constexpr std::uint64_t min_samples_for_variance_ci = 10000;

/// Normal-approximation interval s^2 (1 -/+ z sqrt(2 / (n - 1))) for the variance.
inline Interval variance_confidence_interval(const EnsembleStats& s) {
    if (s.n < min_samples_for_variance_ci) throw Error(Errc::TooFewSamples, "variance interval needs n >= 10^4");
    const double v = s.variance();
    const double hw = normal_critical_value(s.ci_level) * std::sqrt(2.0 / static_cast<double>(s.n - 1));
    return {v * (1.0 - hw), v * (1.0 + hw)};
}

inline Interval mean_confidence_interval(const EnsembleStats& s) {
    const double hw = normal_critical_value(s.ci_level) * s.std_error();
    return {s.mean - hw, s.mean + hw};
}

struct Quartiles {
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
};

/// Quantile with linear interpolation between order statistics (position p (n - 1)).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

inline Quartiles quartile_summary(std::vector<double> samples) {
    if (samples.empty()) throw Error(Errc::Empty, "no samples");
    std::sort(samples.begin(), samples.end());
    return {quantile_sorted(samples, 0.25), quantile_sorted(samples, 0.5), quantile_sorted(samples, 0.75)};
}

/// Fixed-range histogram; values outside [lo, hi) are counted separately.
struct Histogram {
    double lo = -1.0;
    double hi = 1.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t below = 0;
    std::uint64_t above = 0;

    Histogram() = default;
    Histogram(double lo_, double hi_, std::size_t bins) : lo(lo_), hi(hi_), counts(bins, 0) {}

    void add(double v) {
        if (v < lo) {
            ++below;
        } else if (v >= hi) {
            ++above;
        } else {
            auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(counts.size()));
            counts[std::min(k, counts.size() - 1)] += 1;
        }
    }

    void merge(const Histogram& o) {
        if (counts.empty()) {
            *this = o;
            return;
        }
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
        below += o.below;
        above += o.above;
    }

    [[nodiscard]] double bin_center(std::size_t i) const {
        return lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(counts.size());
    }
    [[nodiscard]] double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(Errc::Empty, "no samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Survival function of the limiting Kolmogorov distribution, 2 sum (-1)^(k-1) exp(-2 k^2 c^2).
inline double kolmogorov_survival(double c) {
    if (c <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * c * c);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic critical value of the two-sample KS distance at significance alpha.
inline double ks_critical_value(std::size_t na, std::size_t nb, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::Config, "alpha must lie in (0, 1)");
    auto f = [alpha](double c) { return kolmogorov_survival(c) - alpha; };
    boost::math::tools::eps_tolerance<double> tol(40);
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.2, 5.0, tol, iters);
    const double c = 0.5 * (lo + hi);
    const double n = static_cast<double>(na), m = static_cast<double>(nb);
    return c * std::sqrt((n + m) / (n * m));
}

}  // namespace slidenoise::montecarlo
