#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "slidenoise/core.hpp"
#include "slidenoise/filippov/dopri.hpp"
#include "slidenoise/filippov/sliding.hpp"

namespace slidenoise::filippov {

struct RelayIntegratorSettings {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_initial = 1e-3;
    double h_max = 0.05;
    double h_min = 1e-14;
    double event_tol = 1e-10;  // |C^T x| at a located crossing
    bool record_trajectory = true;
};

struct TrajectoryPoint {
    double t = 0.0;
    Vec3 x{};
    Mode mode = Mode::FlowLeft;
};

struct ModeEvent {
    double t = 0.0;
    Mode from = Mode::FlowLeft;
    Mode to = Mode::FlowLeft;
    Vec3 x{};
};

struct SectionPoint {
    double t = 0.0;
    Vec3 x{};
};

/// Event-driven integrator for the relay system: adaptive DOPRI5 between events, crossings of
/// C^T x = 0 located by root finding on re-taken steps, sliding by equivalent control.
class RelayIntegrator {
public:
    RelayIntegrator(const RelaySystem& rs, const Vec3& x0, RelayIntegratorSettings settings = {}, double t0 = 0.0)
        : rs_(rs), s_(settings), x_(x0), t_(t0), h_(settings.h_initial) {
        const double c = dot(rs_.C, x0);
        if (c < 0.0) {
            mode_ = Mode::FlowLeft;
        } else if (c > 0.0) {
            mode_ = Mode::FlowRight;
        } else {
            mode_ = classify_on_manifold(Mode::FlowLeft);
        }
        record();
    }

    [[nodiscard]] SlidingState state() const { return {x_, mode_, t_}; }
    [[nodiscard]] const std::vector<TrajectoryPoint>& trajectory() const { return traj_; }
    [[nodiscard]] const std::vector<ModeEvent>& events() const { return events_; }
    [[nodiscard]] const std::vector<SectionPoint>& section() const { return section_; }
    [[nodiscard]] std::uint64_t steps() const { return steps_; }

    /// Integrate until t_end, or until the section list has grown by `stop_after_sections` entries.
    void advance_to(double t_end, std::size_t stop_after_sections = 0) {
        const std::size_t section_target = section_.size() + stop_after_sections;
        int zero_length_events = 0;
        while (t_ < t_end) {
            if (stop_after_sections > 0 && section_.size() >= section_target) return;
            double h = std::min({h_, s_.h_max, t_end - t_});
            auto f = [this](const Vec3& y) { return relay_mode_field(y, rs_, mode_); };
            const StepResult step = dopri5_step(f, x_, h);
            const double err = scaled_error(x_, step, s_.atol, s_.rtol);
            if (!(err <= 1.0)) {
                h_ = next_step(h, std::isfinite(err) ? err : 1e10);
                if (h_ < s_.h_min * (1.0 + std::abs(t_))) {
                    throw Error(Errc::StepFailure, fmt::format("step size underflow at t = {}", t_));
                }
                continue;
            }
            ++steps_;
            const double h_next = next_step(h, err);

            if (mode_event(step.x)) {
                const auto [theta, x_event] = locate_mode_event(h);
                check_section(theta);
                zero_length_events = theta == 0.0 ? zero_length_events + 1 : 0;
                if (zero_length_events > 100) {
                    throw Error(Errc::StepFailure, fmt::format("event chattering at t = {}", t_));
                }
                t_ += theta;
                x_ = x_event;
                switch_mode();
                h_ = std::max(std::min(h_next, h), 1e3 * s_.h_min);
                record();
                continue;
            }
            check_section(h);
            t_ += h;
            x_ = step.x;
            if (mode_ == Mode::Sliding) project();
            h_ = h_next;
            record();
        }
    }

private:
    [[nodiscard]] double manifold_value(const Vec3& x) const { return dot(rs_.C, x); }

    [[nodiscard]] Vec3 step_from_current(double theta) const {
        if (theta == 0.0) return x_;
        auto f = [this](const Vec3& y) { return relay_mode_field(y, rs_, mode_); };
        return dopri5_step(f, x_, theta).x;
    }

    // Signed event function: negative while the current mode stays valid.
    [[nodiscard]] double event_function(const Vec3& x) const {
        switch (mode_) {
            case Mode::FlowLeft: return manifold_value(x);
            case Mode::FlowRight: return -manifold_value(x);
            case Mode::Sliding: return std::abs(equivalent_control(x, rs_)) - 1.0;
        }
        return -1.0;
    }

    [[nodiscard]] bool mode_event(const Vec3& x_new) const {
        const double g = event_function(x_new);
        return mode_ == Mode::Sliding ? g >= 0.0 : g > 0.0;
    }

    // Root of the event function inside [0, h]; returns the point on the far (event) side,
    // except for manifold crossings where the midpoint is projected onto the manifold.
    std::pair<double, Vec3> locate_mode_event(double h) {
        auto g = [this](double theta) { return event_function(step_from_current(theta)); };
        const double g0 = g(0.0);
        const double gh = g(h);
        if (g0 >= 0.0) return {0.0, x_};
        std::uintmax_t iters = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b)); };
        const auto [lo, hi] = boost::math::tools::toms748_solve(g, 0.0, h, g0, gh, tol, iters);
        if (mode_ == Mode::Sliding) return {hi, step_from_current(hi)};
        // Pick whichever endpoint lands closer to the manifold.
        Vec3 xl = step_from_current(lo), xh = step_from_current(hi);
        const bool use_hi = std::abs(manifold_value(xh)) < std::abs(manifold_value(xl));
        Vec3 xe = use_hi ? xh : xl;
        if (std::abs(manifold_value(xe)) > s_.event_tol) {
            throw Error(Errc::StepFailure, fmt::format("crossing not located to tolerance at t = {}", t_));
        }
        return {use_hi ? hi : lo, xe};
    }

    void project() {
        const double c = manifold_value(x_);
        const double cc = dot(rs_.C, rs_.C);
        x_ = x_ - (c / cc) * rs_.C;
    }

    [[nodiscard]] Mode classify_on_manifold(Mode from) const {
        const double sigma_left = dot(rs_.C, rs_.A * x_ + rs_.B);
        const double sigma_right = dot(rs_.C, rs_.A * x_ - rs_.B);
        if (sigma_left > 0.0 && sigma_right < 0.0) return Mode::Sliding;
        if (sigma_left > 0.0 && sigma_right >= 0.0) return Mode::FlowRight;
        if (sigma_left <= 0.0 && sigma_right < 0.0) return Mode::FlowLeft;
        // Repelling: leave on the side opposite to where we came from.
        return from == Mode::FlowLeft ? Mode::FlowRight : Mode::FlowLeft;
    }

    void switch_mode() {
        const Mode from = mode_;
        if (mode_ == Mode::Sliding) {
            mode_ = equivalent_control(x_, rs_) >= 1.0 ? Mode::FlowLeft : Mode::FlowRight;
            project();
        } else {
            project();
            mode_ = classify_on_manifold(from);
        }
        events_.push_back({t_, from, mode_, x_});
    }

    void check_section(double theta) {
        if (theta <= 0.0) return;
        const double x3_start = x_[2];
        const Vec3 x_end = step_from_current(theta);
        if (!(x3_start < 0.0 && x_end[2] >= 0.0)) return;
        auto g = [this](double th) { return step_from_current(th)[2]; };
        std::uintmax_t iters = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b)); };
        const auto [lo, hi] = boost::math::tools::toms748_solve(g, 0.0, theta, x3_start, x_end[2], tol, iters);
        const double th = 0.5 * (lo + hi);
        section_.push_back({t_ + th, step_from_current(th)});
    }

    void record() {
        if (s_.record_trajectory) traj_.push_back({t_, x_, mode_});
    }

    RelaySystem rs_;
    RelayIntegratorSettings s_;
    Vec3 x_;
    double t_;
    double h_;
    Mode mode_ = Mode::FlowLeft;
    std::uint64_t steps_ = 0;
    std::vector<TrajectoryPoint> traj_;
    std::vector<ModeEvent> events_;
    std::vector<SectionPoint> section_;
};

struct RelayTrajectory {
    std::vector<TrajectoryPoint> points;
    std::vector<ModeEvent> events;
    SlidingState final_state;
};

inline RelayTrajectory integrate_relay(const RelaySystem& rs, const Vec3& x0, double t_end,
                                       RelayIntegratorSettings settings = {}) {
    if (!(t_end > 0.0)) throw Error(Errc::BadTime, "t_end must be positive");
    RelayIntegrator integ(rs, x0, settings);
    integ.advance_to(t_end);
    return {integ.trajectory(), integ.events(), integ.state()};
}

/// CSV rows t,x1,x2,x3,mode.
inline void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& pts) {
    os << "t,x1,x2,x3,mode\n";
    for (const auto& p : pts) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", p.t, p.x[0], p.x[1], p.x[2], to_string(p.mode));
    }
}

struct PeriodicOrbitResult {
    double period = 0.0;
    int sliding_segment_count = 0;
    std::vector<std::pair<double, double>> segment_times;
    double closure_error = 0.0;
    Vec3 section_point{};
    double section_time = 0.0;
    int section_returns = 0;  // returns to the section per period
};

/// Integrates past `transient`, then records ascending crossings of x3 = 0 and returns the first
/// m for which the m-th return lands within `tol` of the starting section point.
inline PeriodicOrbitResult find_periodic_orbit(const RelaySystem& rs, const Vec3& x0, double transient, double tol,
                                               RelayIntegratorSettings settings = {}, double horizon = 1000.0,
                                               int max_returns = 8) {
    settings.record_trajectory = false;
    RelayIntegrator integ(rs, x0, settings);
    integ.advance_to(transient);
    const std::size_t first = integ.section().size();
    const double t_limit = transient + horizon;
    while (integ.state().t < t_limit) {
        integ.advance_to(t_limit, 1);
        const auto& sec = integ.section();
        if (sec.size() <= first) continue;
        const std::size_t k = sec.size() - 1;
        for (std::size_t m = 1; m <= static_cast<std::size_t>(max_returns) && m <= k - first; ++m) {
            const auto& a = sec[k - m];
            const auto& b = sec[k];
            const double closure = norm(b.x - a.x);
            if (closure >= tol) continue;
            PeriodicOrbitResult r;
            r.period = b.t - a.t;
            r.closure_error = closure;
            r.section_point = a.x;
            r.section_time = a.t;
            r.section_returns = static_cast<int>(m);
            // Make sure every segment entered inside the period has also been exited.
            integ.advance_to(b.t + r.period);
            const auto& ev = integ.events();
            for (std::size_t i = 0; i < ev.size(); ++i) {
                if (ev[i].to != Mode::Sliding || ev[i].t < a.t || ev[i].t >= b.t) continue;
                double exit = ev[i].t;
                for (std::size_t j = i + 1; j < ev.size(); ++j) {
                    if (ev[j].from == Mode::Sliding) {
                        exit = ev[j].t;
                        break;
                    }
                }
                r.segment_times.emplace_back(ev[i].t, exit);
            }
            r.sliding_segment_count = static_cast<int>(r.segment_times.size());
            return r;
        }
    }
    throw Error(Errc::NoPeriodFound, fmt::format("no return within {} of a previous section point before t = {}",
                                                 tol, t_limit));
}

}  // namespace slidenoise::filippov
