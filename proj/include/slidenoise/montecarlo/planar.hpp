#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "slidenoise/analytic/qss.hpp"
#include "slidenoise/core.hpp"
#include "slidenoise/montecarlo/parallel.hpp"
#include "slidenoise/montecarlo/rng.hpp"
#include "slidenoise/montecarlo/stats.hpp"

namespace slidenoise::montecarlo {

struct SimConfig {
    double dt = 1e-4;
    double t_end = 1.0;
    std::uint64_t n_paths = 100000;
    std::uint64_t master_seed = 1;
    std::uint64_t record_stride = 0;  // 0: no path dumps
    unsigned threads = 1;
    std::uint32_t stream = 0;
    std::vector<double> snapshot_times;  // extra times at which x is summarized
    bool keep_snapshot_samples = false;
};

inline std::uint64_t step_count(const SimConfig& cfg) {
    return static_cast<std::uint64_t>(std::llround(cfg.t_end / cfg.dt));
}

inline void validate(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw Error(Errc::Config, "dt must be positive");
    if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw Error(Errc::Config, "t_end must be positive");
    if (cfg.n_paths < 1) throw Error(Errc::Config, "n_paths must be at least 1");
    double prev = 0.0;
    for (double t : cfg.snapshot_times) {
        if (!(t > 0.0 && t <= cfg.t_end)) throw Error(Errc::Config, "snapshot times must lie in (0, t_end]");
        if (!(t > prev)) throw Error(Errc::Config, "snapshot times must be increasing");
        prev = t;
    }
}

/// True when dt exceeds the noise intensity, where the scheme under-resolves the boundary layer.
inline bool coarse_step(const SimConfig& cfg, double eps) { return cfg.dt > eps; }

struct PlanarState {
    double x = 0.0;
    double y = 0.0;
};

/// One Euler-Maruyama step; the drift at x == 0 is the average of both branches.
inline PlanarState em_step_planar(const PlanarState& s, const PiecewiseLinearSystem& sys, double dt, double n1,
                                  double n2) {
    const double eps = sys.epsilon();
    return {s.x + sys.phi(s.x) * dt + std::sqrt(eps * dt) * n1,
            s.y + sys.psi(s.x) * dt + std::sqrt(eps * sys.kappa() * dt) * n2};
}

/// Draws x from the quasi-steady-state density on [-x_b, x_b]. Each branch is a truncated
/// exponential when its slope coefficient is zero; otherwise rejection against the exponential
/// with rate 2 min|phi| over the branch, which dominates the density there.
class QssSampler {
public:
    explicit QssSampler(const PiecewiseLinearSystem& sys, double x_b = -1.0)
        : eps_(sys.epsilon()), xb_(x_b > 0.0 ? x_b : drift_bound_radius(sys)) {
        left_ = Branch{sys.a_left(), sys.c_left()};
        right_ = Branch{sys.a_right(), sys.c_right()};
        for (Branch* b : {&left_, &right_}) {
            // phi is linear in |x| on each branch, so its smallest magnitude sits at an end point.
            const double at_end = b->a - b->c * xb_;
            b->rate = 2.0 * std::min(b->a, at_end);
            b->cut = -std::expm1(-b->rate * xb_ / eps_);
        }
        if (sys.c_left() == 0.0 && sys.c_right() == 0.0) {
            const double ml = -std::expm1(-2.0 * sys.a_left() * xb_ / eps_) / sys.a_left();
            const double mr = -std::expm1(-2.0 * sys.a_right() * xb_ / eps_) / sys.a_right();
            p_left_ = ml / (ml + mr);
        } else {
            p_left_ = analytic::QssDensity(sys, xb_).left_mass();
        }
    }

    [[nodiscard]] double left_probability() const noexcept { return p_left_; }
    [[nodiscard]] double truncation() const noexcept { return xb_; }

    double operator()(NormalSource& src) const {
        const bool left = src.uniform() < p_left_;
        const Branch& b = left ? left_ : right_;
        double u;
        for (;;) {
            u = -eps_ / b.rate * std::log1p(-src.uniform() * b.cut);
            if (b.c == 0.0) break;
            // target exponent (-2 a u + c u^2) against envelope (-rate u)
            const double log_accept = (-2.0 * b.a * u + b.c * u * u + b.rate * u) / eps_;
            if (std::log(src.uniform()) <= log_accept) break;
        }
        return left ? -u : u;
    }

private:
    struct Branch {
        double a = 1.0;
        double c = 0.0;
        double rate = 2.0;
        double cut = 1.0;
    };
    double eps_;
    double xb_;
    Branch left_, right_;
    double p_left_ = 0.5;
};

enum class InitKind { Qss, Fixed };

struct PlanarInit {
    InitKind kind = InitKind::Qss;
    double x0 = 0.0;
    double y0 = 0.0;
};

struct PlanarEnsembleResult {
    EnsembleStats y;
    EnsembleStats x;
    EnsembleStats sgn_x;
    EnsembleStats x_sgn_x;
    EnsembleStats sgn_integral_sq;  // (int_0^t sgn x ds)^2
    Histogram x_hist;
    std::vector<double> snapshot_times;
    std::vector<EnsembleStats> x_snapshots;
    std::vector<std::vector<double>> x_snapshot_samples;
    std::uint64_t steps_per_path = 0;

    void merge(const PlanarEnsembleResult& o) {
        y.merge(o.y);
        x.merge(o.x);
        sgn_x.merge(o.sgn_x);
        x_sgn_x.merge(o.x_sgn_x);
        sgn_integral_sq.merge(o.sgn_integral_sq);
        x_hist.merge(o.x_hist);
        for (std::size_t i = 0; i < x_snapshots.size(); ++i) {
            x_snapshots[i].merge(o.x_snapshots[i]);
            if (i < x_snapshot_samples.size() && i < o.x_snapshot_samples.size()) {
                x_snapshot_samples[i].insert(x_snapshot_samples[i].end(), o.x_snapshot_samples[i].begin(),
                                             o.x_snapshot_samples[i].end());
            }
        }
    }
};

inline constexpr std::uint64_t planar_chunk_paths = 2048;

inline PlanarEnsembleResult run_planar_ensemble(const PiecewiseLinearSystem& sys, const SimConfig& cfg,
                                                const PlanarInit& init = {}) {
    validate(cfg);
    const std::uint64_t n_steps = step_count(cfg);
    const double dt = cfg.dt;
    const double eps = sys.epsilon();
    const double sx = std::sqrt(eps * dt);
    const double sy = std::sqrt(eps * sys.kappa() * dt);
    const bool tangential_noise = sys.kappa() > 0.0;

    std::vector<std::uint64_t> snap_steps;
    for (double t : cfg.snapshot_times) snap_steps.push_back(static_cast<std::uint64_t>(std::llround(t / dt)));

    std::optional<QssSampler> sampler;
    if (init.kind == InitKind::Qss) sampler.emplace(sys);
    const double hist_lo = -30.0 * eps / sys.a_left();
    const double hist_hi = 30.0 * eps / sys.a_right();

    auto empty_result = [&] {
        PlanarEnsembleResult r;
        r.x_hist = Histogram(hist_lo, hist_hi, 120);
        r.snapshot_times = cfg.snapshot_times;
        r.x_snapshots.assign(snap_steps.size(), EnsembleStats{});
        if (cfg.keep_snapshot_samples) r.x_snapshot_samples.assign(snap_steps.size(), {});
        r.steps_per_path = n_steps;
        return r;
    };

    const std::uint64_t n_chunks = (cfg.n_paths + planar_chunk_paths - 1) / planar_chunk_paths;
    auto chunk_fn = [&](std::size_t c) {
        PlanarEnsembleResult r = empty_result();
        const std::uint64_t begin = c * planar_chunk_paths;
        const std::uint64_t end = std::min<std::uint64_t>(cfg.n_paths, begin + planar_chunk_paths);
        for (std::uint64_t p = begin; p < end; ++p) {
            NormalSource src(make_path_engine(cfg.master_seed, p, cfg.stream));
            double x = init.kind == InitKind::Qss ? (*sampler)(src) : init.x0;
            double y = init.y0;
            double sgn_int = 0.0;
            std::size_t next_snap = 0;
            for (std::uint64_t k = 0; k < n_steps; ++k) {
                const double n1 = src();
                const double n2 = tangential_noise ? src() : 0.0;
                sgn_int += sgn(x) * dt;
                const double phi = sys.phi(x);
                const double psi = sys.psi(x);
                x += phi * dt + sx * n1;
                y += psi * dt + sy * n2;
                while (next_snap < snap_steps.size() && snap_steps[next_snap] == k + 1) {
                    r.x_snapshots[next_snap].add(x);
                    if (cfg.keep_snapshot_samples) r.x_snapshot_samples[next_snap].push_back(x);
                    ++next_snap;
                }
            }
            r.y.add(y);
            r.x.add(x);
            r.sgn_x.add(sgn(x));
            r.x_sgn_x.add(x * sgn(x));
            r.sgn_integral_sq.add(sgn_int * sgn_int);
            r.x_hist.add(x);
        }
        return r;
    };
    auto chunks = run_chunks<PlanarEnsembleResult>(n_chunks, cfg.threads, chunk_fn);
    PlanarEnsembleResult total = empty_result();
    for (const auto& r : chunks) total.merge(r);
    return total;
}

struct PathSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Re-simulates one path of an ensemble (same stream) and keeps every `stride`-th state.
inline std::vector<PathSample> simulate_planar_path(const PiecewiseLinearSystem& sys, const SimConfig& cfg,
                                                    const PlanarInit& init, std::uint64_t path_index,
                                                    std::uint64_t stride) {
    validate(cfg);
    if (stride == 0) throw Error(Errc::Config, "record stride must be positive");
    const std::uint64_t n_steps = step_count(cfg);
    NormalSource src(make_path_engine(cfg.master_seed, path_index, cfg.stream));
    PlanarState s{init.kind == InitKind::Qss ? QssSampler(sys)(src) : init.x0, init.y0};
    std::vector<PathSample> out{{0.0, s.x, s.y}};
    const bool tangential_noise = sys.kappa() > 0.0;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        const double n1 = src();
        const double n2 = tangential_noise ? src() : 0.0;
        s = em_step_planar(s, sys, cfg.dt, n1, n2);
        if ((k + 1) % stride == 0) out.push_back({static_cast<double>(k + 1) * cfg.dt, s.x, s.y});
    }
    return out;
}

}  // namespace slidenoise::montecarlo
