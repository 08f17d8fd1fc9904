#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "slidenoise/core.hpp"
#include "slidenoise/montecarlo/parallel.hpp"
#include "slidenoise/montecarlo/planar.hpp"
#include "slidenoise/montecarlo/rng.hpp"

namespace slidenoise::montecarlo {

/// Streaming detector of sign changes that persist for at least `debounce` consecutive samples.
/// The recorded time is that of the first sample carrying the new sign.
class SignChangeDetector {
public:
    explicit SignChangeDetector(int debounce = 50) : debounce_(debounce) {
        if (debounce < 1) throw Error(Errc::Config, "debounce must be at least 1 step");
    }

    void observe(double t, double v) {
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) return;
        if (accepted_ == 0) {
            accepted_ = s;
            return;
        }
        if (s == accepted_) {
            run_ = 0;
            return;
        }
        if (run_ == 0) start_ = t;
        if (++run_ >= debounce_) {
            accepted_ = s;
            run_ = 0;
            times_.push_back(start_);
        }
    }

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }

private:
    int debounce_;
    int accepted_ = 0;
    int run_ = 0;
    double start_ = 0.0;
    std::vector<double> times_;
};

struct OscillationRecord {
    std::vector<double> times;
    double oscillation_time = std::numeric_limits<double>::quiet_NaN();
};

/// t3 - t1 over the last three accepted sign changes.
inline double oscillation_time(const std::vector<double>& change_times) {
    if (change_times.size() < 3) throw Error(Errc::InsufficientOscillations, "fewer than three accepted sign changes");
    const std::size_t n = change_times.size();
    return change_times[n - 1] - change_times[n - 3];
}

/// Same, from a sampled series v(t0 + k dt).
inline double oscillation_time(const std::vector<double>& series, double dt, int debounce = 50, double t0 = 0.0) {
    SignChangeDetector det(debounce);
    for (std::size_t k = 0; k < series.size(); ++k) det.observe(t0 + static_cast<double>(k) * dt, series[k]);
    return oscillation_time(det.times());
}

inline OscillationRecord make_record(std::vector<double> times) {
    OscillationRecord r;
    r.times = std::move(times);
    if (r.times.size() >= 3) r.oscillation_time = oscillation_time(r.times);
    return r;
}

/// One Euler-Maruyama path of dx = (A x - B sgn(C^T x)) dt + sqrt(eps) B dW, watching x3.
inline OscillationRecord simulate_relay_path(const RelaySystem& rs, double eps, const SimConfig& cfg, const Vec3& x0,
                                             std::uint64_t path_index, int debounce = 50) {
    const std::uint64_t n_steps = step_count(cfg);
    const double dt = cfg.dt;
    const double noise = std::sqrt(eps * dt);
    NormalSource src(make_path_engine(cfg.master_seed, path_index, cfg.stream));
    SignChangeDetector det(debounce);
    Vec3 x = x0;
    det.observe(0.0, x[2]);
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        const double u = -sgn(dot(rs.C, x));
        const double n = eps > 0.0 ? src() : 0.0;
        const Vec3 drift = rs.A * x + u * rs.B;
        x = x + dt * drift + (noise * n) * rs.B;
        det.observe(static_cast<double>(k + 1) * dt, x[2]);
    }
    return make_record(det.times());
}

inline constexpr std::uint64_t relay_chunk_paths = 4;

/// Independent noisy relay runs; path p always uses stream (master_seed, p), so runs at
/// different eps share their underlying normal draws.
inline std::vector<OscillationRecord> run_relay_ensemble(const RelaySystem& rs, double eps, const SimConfig& cfg,
                                                         const Vec3& x0, int debounce = 50) {
    validate(cfg);
    if (!(eps >= 0.0)) throw Error(Errc::BadNoise, "epsilon must be nonnegative");
    const std::uint64_t n_chunks = (cfg.n_paths + relay_chunk_paths - 1) / relay_chunk_paths;
    auto chunks = run_chunks<std::vector<OscillationRecord>>(n_chunks, cfg.threads, [&](std::size_t c) {
        std::vector<OscillationRecord> out;
        const std::uint64_t begin = c * relay_chunk_paths;
        const std::uint64_t end = std::min<std::uint64_t>(cfg.n_paths, begin + relay_chunk_paths);
        for (std::uint64_t p = begin; p < end; ++p) out.push_back(simulate_relay_path(rs, eps, cfg, x0, p, debounce));
        return out;
    });
    std::vector<OscillationRecord> all;
    all.reserve(cfg.n_paths);
    for (auto& v : chunks) all.insert(all.end(), v.begin(), v.end());
    return all;
}

}  // namespace slidenoise::montecarlo
