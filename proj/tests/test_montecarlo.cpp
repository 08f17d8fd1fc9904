#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "slidenoise/analytic/qss.hpp"
#include "slidenoise/filippov/relay.hpp"
#include "slidenoise/montecarlo/planar.hpp"
#include "slidenoise/montecarlo/relay_em.hpp"
#include "slidenoise/montecarlo/rng.hpp"
#include "slidenoise/montecarlo/stats.hpp"

using namespace slidenoise;
using namespace slidenoise::montecarlo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

template <class F>
Errc code_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::Config;
}

}  // namespace

TEST_CASE("ensemble statistics", "[montecarlo]") {
    EnsembleStats all, a, b;
    NormalSource src(make_path_engine(7, 0));
    for (int i = 0; i < 1000; ++i) {
        const double v = 3.0 + 2.0 * src();
        all.add(v);
        (i < 300 ? a : b).add(v);
    }
    a.merge(b);
    CHECK(a.n == all.n);
    CHECK_THAT(a.mean, WithinRel(all.mean, 1e-13));
    CHECK_THAT(a.variance(), WithinRel(all.variance(), 1e-12));
    CHECK_THAT(all.variance(), WithinRel(4.0, 0.15));

    EnsembleStats empty;
    empty.ci_level = 0.9;
    empty.merge(all);
    CHECK(empty.ci_level == 0.9);
    CHECK(empty.n == all.n);
}

TEST_CASE("variance confidence interval", "[montecarlo]") {
    EnsembleStats s;
    s.n = 100000;
    s.m2 = 3.16e-4 * (s.n - 1);
    const auto ci = variance_confidence_interval(s);
    CHECK_THAT(ci.half_width(), WithinRel(2.7699e-6, 1e-4));
    CHECK(ci.contains(3.16e-4));

    s.ci_level = 0.0;
    const auto degenerate = variance_confidence_interval(s);
    CHECK(degenerate.lo == degenerate.hi);

    EnsembleStats few;
    few.n = 9999;
    CHECK(code_of([&] { variance_confidence_interval(few); }) == Errc::TooFewSamples);
    s.ci_level = 1.0;
    CHECK(code_of([&] { variance_confidence_interval(s); }) == Errc::Config);
}

TEST_CASE("variance interval coverage", "[montecarlo]") {
    int covered = 0;
    for (std::uint64_t e = 0; e < 200; ++e) {
        NormalSource src(make_path_engine(11, e, 3));
        EnsembleStats s;
        for (int i = 0; i < 10000; ++i) s.add(src());
        covered += variance_confidence_interval(s).contains(1.0);
    }
    CHECK(covered >= 180);
}

TEST_CASE("quartiles", "[montecarlo]") {
    const auto q = quartile_summary({5, 1, 4, 2, 3});
    CHECK(q.q25 == 2.0);
    CHECK(q.median == 3.0);
    CHECK(q.q75 == 4.0);
    const auto c = quartile_summary({7.5, 7.5, 7.5});
    CHECK((c.q25 == 7.5 && c.median == 7.5 && c.q75 == 7.5));
    CHECK(quartile_summary({1, 2}).median == 1.5);
    CHECK(code_of([] { quartile_summary({}); }) == Errc::Empty);
}

TEST_CASE("two-sample KS", "[montecarlo]") {
    CHECK_THAT(ks_critical_value(2, 2, 0.01), WithinAbs(1.6276, 1e-4));
    CHECK_THAT(ks_critical_value(2, 2, 0.05), WithinAbs(1.3581, 1e-4));
    CHECK_THAT(ks_critical_value(100, 100, 0.05), WithinAbs(1.3581 * std::sqrt(0.02), 1e-5));
    CHECK(ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_distance({1, 2}, {3, 4}) == 1.0);
    CHECK(code_of([] { ks_critical_value(10, 10, 0.0); }) == Errc::Config);
}

TEST_CASE("histogram", "[montecarlo]") {
    Histogram h(0.0, 1.0, 4), g(0.0, 1.0, 4);
    for (double v : {-0.1, 0.0, 0.3, 0.99, 1.0}) h.add(v);
    g.add(0.6);
    h.merge(g);
    CHECK(h.below == 1);
    CHECK(h.above == 1);
    CHECK(h.counts == std::vector<std::uint64_t>{1, 1, 1, 1});
    CHECK(h.bin_center(0) == 0.125);
}

TEST_CASE("euler-maruyama step", "[montecarlo]") {
    const auto sys = make_piecewise_linear({2, 1, 0.5, -0.5, 0, 0, 0, 0}, 0.01, 0.5);
    const double dt = 1e-4;
    const auto s0 = em_step_planar({0.01, 0.0}, sys, dt, 0.0, 0.0);
    CHECK_THAT(s0.x, WithinAbs(0.01 - 1.0 * dt, 1e-16));
    CHECK_THAT(s0.y, WithinAbs(-0.5 * dt, 1e-16));
    const auto s1 = em_step_planar({0.01, 0.0}, sys, dt, 1.0, 2.0);
    CHECK_THAT(s1.x - s0.x, WithinRel(std::sqrt(0.01 * dt), 1e-12));
    CHECK_THAT(s1.y - s0.y, WithinRel(2.0 * std::sqrt(0.01 * 0.5 * dt), 1e-12));
    // on the manifold the drift is the branch average
    const auto sm = em_step_planar({0.0, 0.0}, sys, dt, 0.0, 0.0);
    CHECK_THAT(sm.x, WithinAbs(0.5 * dt, 1e-16));
    CHECK_THAT(sm.y, WithinAbs(0.0, 1e-16));

    // one-step mean and variance from x0 = eps
    NormalSource src(make_path_engine(3, 0));
    EnsembleStats m;
    for (int i = 0; i < 200000; ++i) m.add(em_step_planar({0.01, 0.0}, sys, dt, src(), src()).x);
    CHECK(std::abs(m.mean - s0.x) < 4 * m.std_error());
    CHECK_THAT(m.variance(), WithinRel(0.01 * dt, 0.02));
}

TEST_CASE("ensemble path agrees with the single-path replay", "[montecarlo]") {
    const auto sys = make_piecewise_linear({2, 1, 1, 0}, 0.01);
    SimConfig cfg;
    cfg.n_paths = 1;
    cfg.t_end = 0.1;
    const auto ens = run_planar_ensemble(sys, cfg);
    const auto path = simulate_planar_path(sys, cfg, {}, 0, step_count(cfg));
    REQUIRE(path.size() == 2);
    CHECK_THAT(path.back().x, WithinAbs(ens.x.mean, 1e-12));
    CHECK_THAT(path.back().y, WithinAbs(ens.y.mean, 1e-12));
}

TEST_CASE("no tangential spread without slope or noise", "[montecarlo]") {
    const auto sys = make_piecewise_linear({2, 1, 0.7, 0.7}, 0.01);
    SimConfig cfg;
    cfg.n_paths = 3000;
    cfg.t_end = 0.2;
    const auto r = run_planar_ensemble(sys, cfg);
    CHECK(r.y.variance() < 1e-28);
    CHECK_THAT(r.y.mean, WithinRel(0.7 * 0.2, 1e-9));
}

TEST_CASE("results do not depend on the thread count", "[montecarlo]") {
    const auto sys = make_piecewise_linear({2, 1, 1, 0, 0.5, 0, 0.3, -0.2}, 0.01, 0.1);
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.t_end = 0.05;
    cfg.snapshot_times = {0.01};
    const auto one = run_planar_ensemble(sys, cfg);
    cfg.threads = 4;
    const auto four = run_planar_ensemble(sys, cfg);
    CHECK(one.y.mean == four.y.mean);
    CHECK(one.y.m2 == four.y.m2);
    CHECK(one.x_sgn_x.mean == four.x_sgn_x.mean);
    CHECK(one.x_hist.counts == four.x_hist.counts);
    CHECK(one.x_snapshots[0].m2 == four.x_snapshots[0].m2);

    const auto rs = canonical_relay(-0.06);
    SimConfig rc;
    rc.n_paths = 9;
    rc.t_end = 5.0;
    const auto r1 = run_relay_ensemble(rs, 1e-4, rc, {0.1, 0.0, 0.0}, 50);
    rc.threads = 3;
    const auto r3 = run_relay_ensemble(rs, 1e-4, rc, {0.1, 0.0, 0.0}, 50);
    REQUIRE(r1.size() == r3.size());
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].times == r3[i].times);
}

TEST_CASE("qss sampler", "[montecarlo]") {
    for (const PiecewiseLinearCoeffs& c :
         {PiecewiseLinearCoeffs{2, 1, 0, 0, 0, 0, 0, 0}, PiecewiseLinearCoeffs{2, 1, 0, 0, 1, 1.5, 0, 0}}) {
        const auto sys = make_piecewise_linear(c, 0.05);
        const QssSampler sampler(sys);
        const analytic::QssDensity q(sys, sampler.truncation());
        const auto m = analytic::qss_moments(q);
        CHECK_THAT(sampler.left_probability(), WithinRel(q.left_mass(), 1e-8));
        NormalSource src(make_path_engine(5, 0, 9));
        EnsembleStats sg, x, ax;
        double widest = 0.0;
        for (int i = 0; i < 200000; ++i) {
            const double v = sampler(src);
            widest = std::max(widest, std::abs(v));
            sg.add(sgn(v));
            x.add(v);
            ax.add(std::abs(v));
        }
        CHECK(widest <= sampler.truncation());
        CHECK(std::abs(sg.mean - m.mean_sgn) < 4 * sg.std_error());
        CHECK(std::abs(x.mean - m.mean_x) < 4 * x.std_error());
        CHECK(std::abs(ax.mean - m.mean_xsgn) < 4 * ax.std_error());
    }
}

TEST_CASE("sign change detector", "[montecarlo]") {
    SignChangeDetector det(5);
    double t = 0.0;
    auto feed = [&](int n, double v) {
        for (int i = 0; i < n; ++i, t += 1.0) det.observe(t, v);
    };
    feed(10, 1.0);
    feed(3, -1.0);  // flicker shorter than the debounce
    feed(10, 1.0);
    CHECK(det.times().empty());
    feed(2, 0.0);
    feed(8, -1.0);
    REQUIRE(det.times().size() == 1);
    CHECK(det.times()[0] == 25.0);
    CHECK(code_of([] { SignChangeDetector(0); }) == Errc::Config);

    const double dt = 1e-3, period = 2.0;
    std::vector<double> series;
    for (int k = 0; k < 10000; ++k) series.push_back(std::sin(2 * std::numbers::pi * (k * dt + 0.1234) / period));
    CHECK(std::abs(oscillation_time(series, dt) - period) < dt);
    CHECK(code_of([] { oscillation_time(std::vector<double>{1.0, 2.0}); }) == Errc::InsufficientOscillations);
    const auto rec = make_record({1.0, 2.0});
    CHECK(std::isnan(rec.oscillation_time));
}

TEST_CASE("noise-free Euler relay period converges to the orbit period", "[montecarlo]") {
    const auto rs = canonical_relay(-0.06);
    const auto orb = filippov::find_periodic_orbit(rs, {0.1, 0.0, 0.0}, 500.0, 1e-9);
    auto period_error = [&](double dt) {
        SimConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 60.0;
        const auto rec = simulate_relay_path(rs, 0.0, cfg, orb.section_point, 0, 50);
        return std::abs(rec.oscillation_time - orb.period);
    };
    // first-order scheme on a discontinuous field: O(dt), not within a couple of steps
    const double coarse = period_error(4e-4), fine = period_error(1e-4);
    UNSCOPED_INFO("period error " << coarse << " at dt 4e-4, " << fine << " at dt 1e-4");
    CHECK(fine < coarse);
    CHECK(fine < 0.05);
}
