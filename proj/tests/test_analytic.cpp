#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "slidenoise/analytic/escape.hpp"
#include "slidenoise/analytic/first_passage.hpp"
#include "slidenoise/analytic/qss.hpp"
#include "slidenoise/analytic/sliding.hpp"
#include "slidenoise/analytic/transition.hpp"
#include "slidenoise/app/experiments.hpp"
#include "slidenoise/verify/oracles.hpp"

using namespace slidenoise;
using namespace slidenoise::analytic;
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

// ---- first passage --------------------------------------------------------------------------

TEST_CASE("first_passage_density basics", "[analytic]") {
    CHECK(first_passage_density(0.3, 0.0, 1.0, 0.01) == 0.0);
    CHECK(code_of([] { first_passage_density(0.0, 0.1, 1.0, 0.01); }) == Errc::BadTime);
    // total mass 1 when the drift carries x0 toward 0
    for (auto [x0, mu] : std::vector<std::pair<double, double>>{{-0.1, -2.0}, {0.2, 1.0}, {-0.05, -2.0}}) {
        const double peak = x0 / mu;
        auto f = [&](double t) { return t > 0 ? first_passage_density(t, x0, mu, 0.01) : 0.0; };
        const double m =
            numerics::integrate(f, {0.0, 0.3 * peak, peak, 3 * peak, 30 * peak}, {1e-300, 1e-12, 4000}).value;
        CHECK_THAT(m, WithinAbs(1.0, 1e-8));
    }
}

TEST_CASE("first-passage Laplace transform against quadrature", "[analytic]") {
    for (double lambda : {0.5, 1.0, 2.0}) {
        CHECK_THAT(verify::first_passage_laplace_numeric(lambda, 0.1, 1.0, 0.01),
                   WithinRel(first_passage_laplace(lambda, 0.1, 1.0, 0.01), 1e-6));
        CHECK_THAT(verify::first_passage_laplace_numeric(lambda, -0.05, -2.0, 0.01),
                   WithinRel(first_passage_laplace(lambda, -0.05, -2.0, 0.01), 1e-6));
    }
}

TEST_CASE("absorbed_density", "[analytic]") {
    for (double mu : {-2.0, 0.0, 1.5}) {
        for (double x0 : {0.01, 0.05}) {
            CHECK_THAT(absorbed_density(0.0, 0.01, mu, x0, 0.01), WithinAbs(0.0, 1e-12));
        }
    }
    // mu = 0: reflection principle
    const double t = 0.02, eps = 0.01, x0 = 0.03, x = 0.02;
    auto gauss = [&](double d) { return std::exp(-d * d / (2 * eps * t)) / std::sqrt(2 * std::numbers::pi * eps * t); };
    CHECK_THAT(absorbed_density(x, t, 0.0, x0, eps), WithinRel(gauss(x - x0) - gauss(x + x0), 1e-13));
    // surviving mass is at most 1 and equals 1 - P(hit by t)
    const double surv =
        numerics::integrate([&](double y) { return absorbed_density(y, t, -1.0, x0, eps); }, 0.0, 1.0).value;
    CHECK(surv < 1.0);
    CHECK(surv > 0.0);
    CHECK(code_of([] { absorbed_density(-0.1, 0.1, 0.0, 0.1, 0.01); }) == Errc::OutOfDomain);
}

// ---- transition density -------------------------------------------------------------------

TEST_CASE("transition_pdf against the nested-quadrature oracle", "[analytic]") {
    const double eps = 0.01;
    const TransitionDensity td(2.0, 1.0, eps);
    for (double x0 : {-0.02, 0.0, 0.02}) {
        for (double t : {0.002, 0.01, 0.05}) {
            for (double x : {-0.015, -0.004, 0.003, 0.012, 0.03}) {
                const double ref = verify::transition_pdf_nested(x, t, x0, 2.0, 1.0, eps);
                if (ref < 1e-8) continue;
                CHECK_THAT(transition_pdf(x, t, x0, td), WithinRel(ref, 1e-7));
            }
        }
    }
}

TEST_CASE("transition_pdf normalization and continuity", "[analytic]") {
    const double eps = 0.01;
    const TransitionDensity td(2.0, 1.0, eps);
    for (double t : {eps / 20, eps / 2, eps, 10 * eps, 100 * eps}) {
        for (double x0 : {-3 * eps, 0.0, 3 * eps}) {
            const double r = transition_support_radius(t, x0, td);
            CHECK_THAT(transition_mass(-r, r, t, x0, td), WithinAbs(1.0, 1e-6));
            const double l = transition_pdf_branch(0.0, t, x0, Side::Left, td);
            const double rr = transition_pdf_branch(0.0, t, x0, Side::Right, td);
            CHECK_THAT(l, WithinRel(rr, 1e-8));
        }
    }
}

TEST_CASE("relaxation toward the steady state", "[analytic]") {
    const double eps = 0.01;
    const TransitionDensity td(2.0, 1.0, eps);
    const auto grid = app::linear_grid(-0.03, 0.06, 181);
    // frozen from this implementation on the 181-point grid; the gaps must shrink monotonically
    const std::vector<std::pair<double, double>> expected{
        {eps / 20, 1.3178511756687741}, {eps / 2, 0.9365162382913097}, {eps, 0.64466482011792481},
        {10 * eps, 0.00077119040843122389}};
    double prev = INFINITY;
    for (auto [t, gap] : expected) {
        const auto s = app::density_slice(td, 0.02, t, grid);
        CHECK_THAT(s.sup_gap_scaled, WithinRel(gap, 1e-6));
        CHECK(s.sup_gap_scaled < prev);
        prev = s.sup_gap_scaled;
    }
    CHECK(prev < 1e-3);
    CHECK(app::density_slice(td, 0.02, 100 * eps, grid).sup_gap_scaled < 1e-10);
}

TEST_CASE("steady state", "[analytic]") {
    const TransitionDensity td(2.0, 1.0, 0.01);
    CHECK_THAT(td.stationary_constant(), WithinRel(4.0 / 3.0, 1e-15));
    CHECK(TransitionDensity(1.0, 1.0, 0.01).stationary_constant() == 1.0);
    const double K = 4.0 / 3.0;
    CHECK_THAT(K / (2 * 2.0) + K / (2 * 1.0), WithinRel(1.0, 1e-15));
    CHECK_THAT(steady_state_pdf(-0.01, 1.0, 1.0, 0.01), WithinRel(steady_state_pdf(0.01, 1.0, 1.0, 0.01), 1e-15));
    const double m = numerics::integrate([](double x) { return steady_state_pdf(x, 2.0, 1.0, 0.01); },
                                         {-0.5, 0.0, 0.5}, {0, 1e-12, 200})
                         .value;
    CHECK_THAT(m, WithinAbs(1.0, 1e-12));
}

TEST_CASE("Laplace transform of the transition density", "[analytic]") {
    const TransitionDensity td(2.0, 1.0, 0.01);
    for (double x : {0.01, 0.03}) {
        auto f = [&](double t) { return t > 0 ? std::exp(-t) * transition_pdf(x, t, 0.0, td) : 0.0; };
        const double v =
            numerics::integrate(f, {0, 1e-4, 1e-3, 1e-2, 0.1, 1, 10, 60}, {1e-300, 1e-10, 4000}).value;
        CHECK_THAT(transition_laplace_positive(x, 1.0, td), WithinRel(v, 1e-8));
    }
}

// ---- boundary flux -----------------------------------------------------------------------------

TEST_CASE("boundary flux", "[analytic]") {
    const TransitionDensity sym(1.5, 1.5, 0.01);
    for (double t : {0.001, 0.01, 0.1}) CHECK(boundary_flux(t, sym) == 0.0);
    CHECK_THAT(boundary_flux_numeric(0.01, sym), WithinAbs(0.0, 1e-6));

    const TransitionDensity td(2.0, 1.0, 0.01);
    const auto li = boundary_flux_integrals(td);
    CHECK_THAT(li.flux_integral, WithinRel(-1.0 / 6.0, 1e-4));
    CHECK_THAT(li.moment_integral, WithinRel(-0.01 / 12.0, 1e-4));
    CHECK(li.tail_bound < 1e-10);

    // the flux is the rate of change of the mass on x > 0
    auto right_mass = [&](double t) { return transition_mass(0.0, transition_support_radius(t, 0.0, td), t, 0.0, td); };
    const double t = 0.01, dt = 1e-5;
    CHECK_THAT((right_mass(t + dt) - right_mass(t - dt)) / (2 * dt), WithinRel(-boundary_flux(t, td), 1e-5));
    // half of the mass starts on each side
    CHECK_THAT(right_mass(1e-9), WithinAbs(0.5, 1e-3));
    CHECK_THAT(transition_mass(-1.0, 1.0, 1e-9, 0.02, td), WithinAbs(1.0, 1e-8));
}

// ---- Q function and variance ------------------------------------------------------------------

TEST_CASE("q_function", "[analytic]") {
    const double K = 4.0 / 3.0;
    CHECK(q_function(0.0, 2.0, K, 0.01) == 0.0);
    // against the triple integral
    CHECK_THAT(q_function(0.5, 2.0, K, 0.01), WithinRel(verify::q_function_triple(0.5, 2.0, K, 0.01), 1e-6));
    CHECK_THAT(q_function(0.5, 2.0, K, 0.01), WithinRel(4.1459375e-4, 1e-9));
    for (double t : {0.003, 0.05}) {
        for (double a : {0.7, 3.0}) {
            CHECK_THAT(q_function(t, a, K, 0.02), WithinRel(verify::q_function_triple(t, a, K, 0.02), 1e-6));
        }
    }
    // large t: leading term K eps t^2 / (4 a)
    CHECK_THAT(q_function(10.0, 1.0, K, 0.01) / (K * 0.01 * 100.0 / 4.0), WithinRel(1.0, 2e-3));
    const auto sys = make_piecewise_linear({2.0, 1.0}, 0.01);
    CHECK(q_function(0.5, 2.0, sys) == q_function(0.5, 2.0, K, 0.01));
}

TEST_CASE("Q series residual shrinks like eps^2", "[analytic]") {
    auto residual = [](double eps) {
        const auto sys = make_piecewise_linear({2.0, 1.0}, eps);
        return std::abs((q_function(1.0, 2.0, sys) + q_function(1.0, 1.0, sys)) / eps - q_sum_series(1.0, sys));
    };
    const double order = std::log2(residual(0.01) / residual(0.005));
    CHECK_THAT(order, WithinAbs(2.0, 0.3));
}

TEST_CASE("sliding solution and mean of y", "[analytic]") {
    const auto sys = make_piecewise_linear({2, 1, 1, 0}, 0.01);
    CHECK_THAT(sliding_slope(sys), WithinRel(1.0 / 3.0, 1e-15));
    CHECK_THAT(sliding_solution(sys, 0.5, 3.0) - 0.5, WithinRel(1.0, 1e-15));
    CHECK(sliding_solution(sys, 0.7, 0.0) == 0.7);
    CHECK(sliding_slope(make_piecewise_linear({2, 1, 0.4, 0.4}, 0.01)) == Catch::Approx(0.4).epsilon(1e-15));
    CHECK(code_of([&] { sliding_solution(sys, 0.0, -1.0); }) == Errc::BadTime);

    // c = d = 0: no correction
    CHECK(mean_y(sys, 0.0, 1.0).value == sliding_solution(sys, 0.0, 1.0));
    // a_L = a_R with equal slopes: no correction
    CHECK(mean_y_correction(make_piecewise_linear({1, 1, 1, 0, 0.5, 0.5, 2, 2}, 0.01), 1.0) == 0.0);
    // c_R = 1: eps t (-(a_L^2 c_R)(b_L - b_R)) / (2 a_L a_R (a_L + a_R)^2) = -0.01 * 4 / 36
    const auto cr = make_piecewise_linear({2, 1, 1, 0, 0, 1, 0, 0}, 0.01);
    CHECK_THAT(mean_y_correction(cr, 1.0), WithinRel(-0.01 / 9.0, 1e-13));
    CHECK(mean_y(cr, 0.0, 1.0).in_window);
    CHECK_FALSE(mean_y(cr, 0.0, 0.001).in_window);
}

TEST_CASE("leading-order variance", "[analytic]") {
    CHECK_THAT(variance_y_leading(make_piecewise_linear({2, 1, 1, 0}, 0.01), 1.0), WithinRel(0.01 / 9.0, 1e-14));
    CHECK(variance_y_leading(make_piecewise_linear({2, 1, 0.3, 0.3}, 0.01), 1.0) == 0.0);
    CHECK_THAT(variance_y_leading(make_piecewise_linear({2, 1, 0.3, 0.3}, 0.01, 1.0), 2.0), WithinRel(0.02, 1e-15));
}

TEST_CASE("exact symmetric variance", "[analytic]") {
    const double eps = 0.01;
    // all exponentially small terms are below 1e-20 at t = 1
    CHECK_THAT(variance_y_exact_symmetric(1.0, 1.0, 0.0, eps, 1.0), WithinRel(0.25 * (eps - eps * eps), 1e-12));
    // against the triple-integral Q: Var = (db^2 / 4)(t^2 - 4 Q / eps) with K = a
    for (double t : {0.001, 0.02, 0.1, 0.3}) {
        const double ref = 0.25 * (t * t - 4.0 * verify::q_function_triple(t, 1.0, 1.0, eps) / eps);
        CHECK_THAT(variance_y_exact_symmetric(1.0, 1.0, 0.0, eps, t), WithinRel(ref, 1e-6));
    }
    CHECK_THAT(variance_y_exact_symmetric(1.0, 1.0, 0.0, eps, 0.1), WithinRel(2.250305940e-4, 1e-8));
    CHECK(variance_y_exact_symmetric(1.0, 1.0, 0.0, eps, 0.0) == 0.0);
    CHECK(variance_y_exact_symmetric(1.0, 1.0, 0.0, eps, 1e-9) < 1e-17);
    // no overflow deep into the erfc tail
    CHECK(std::isfinite(variance_y_exact_symmetric(3.0, 1.0, 0.0, 1e-4, 50.0)));
    // agrees with the leading form to O(eps^2)
    const auto sys = make_piecewise_linear({1, 1, 1, 0}, eps);
    CHECK(std::abs(variance_y_exact_symmetric(sys, 1.0) - variance_y_leading(sys, 1.0)) <
          eps * eps);
    CHECK_THAT(variance_y_exact_symmetric(make_piecewise_linear({1, 1, 1, 0}, eps, 1.0), 1.0),
               WithinRel(0.25 * (eps - eps * eps) + eps, 1e-12));
    CHECK(code_of([] { variance_y_exact_symmetric(make_piecewise_linear({2, 1, 1, 0}, 0.01), 1.0); }) == Errc::Config);
}

TEST_CASE("sign autocorrelation integral", "[analytic]") {
    const auto sys = make_piecewise_linear({2, 1}, 0.01);
    CHECK_THAT(sgn_autocorrelation_integral(sys, 1.0).value, WithinRel(1.0 / 9.0 + 0.04 / 9.0, 1e-14));
    const auto sym = make_piecewise_linear({1.5, 1.5}, 0.01);
    CHECK_THAT(sgn_autocorrelation_integral(sym, 2.0).value, WithinRel(0.01 * 2.0 / (1.5 * 1.5), 1e-14));
    CHECK_FALSE(sgn_autocorrelation_integral(sys, 0.001).in_window);
}

// ---- quasi-steady state -----------------------------------------------------------------------

TEST_CASE("qss density", "[analytic]") {
    const auto pc = make_piecewise_linear({2, 1}, 0.01);
    const QssDensity q(pc);
    for (double x : {-0.02, -0.001, 0.0, 0.004, 0.03}) {
        CHECK_THAT(qss_pdf(x, q), WithinRel(steady_state_pdf(x, pc), 1e-10));
    }
    CHECK_THAT(q.pdf(0.0), WithinRel(q.K_eps() / 0.01, 1e-15));
    CHECK(code_of([&] { (void)q.pdf(1.5); }) == Errc::OutOfDomain);
    CHECK_THAT(q.expectation([](double) { return 1.0; }), WithinAbs(1.0, 1e-8));

    const auto m = qss_moments(q);
    CHECK_THAT(m.mean_sgn, WithinAbs(1.0 / 3.0, 1e-9));
    CHECK_THAT(m.mean_x, WithinRel(0.0025, 1e-8));
    const auto ms = qss_moments(QssDensity(make_piecewise_linear({1.3, 1.3}, 0.01)));
    CHECK_THAT(ms.mean_sgn, WithinAbs(0.0, 1e-12));
    CHECK_THAT(ms.mean_x, WithinAbs(0.0, 1e-12));
}

TEST_CASE("qss normalization against its expansion", "[analytic]") {
    const PiecewiseLinearCoeffs c{2, 1, 0, 0, 1, 1, 0, 0};
    auto gap = [&](double eps) {
        const auto sys = make_piecewise_linear(c, eps);
        return std::abs(QssDensity(sys).K_eps() - qss_normalization_series(sys));
    };
    CHECK(gap(0.01) < 2e-4);
    CHECK_THAT(std::log2(gap(0.02) / gap(0.01)), WithinAbs(2.0, 0.3));
    const auto sys = make_piecewise_linear(c, 0.005);
    const auto m = qss_moments(QssDensity(sys));
    const auto ms = qss_moments_series(sys);
    CHECK_THAT(m.mean_sgn, WithinAbs(ms.mean_sgn, 5e-4));
    CHECK_THAT(m.mean_x, WithinAbs(ms.mean_x, 5e-5));
}

// ---- escape ---------------------------------------------------------------------------------

TEST_CASE("potential", "[analytic]") {
    const auto sys = make_piecewise_linear({2, 1}, 0.1);
    CHECK(potential(0.0, sys) == 0.0);
    CHECK(potential(-0.5, sys) == 1.0);
    CHECK(potential(0.5, sys) == 0.5);
    const auto cl = make_piecewise_linear({2, 1, 0, 0, 1, 0, 0, 0}, 0.1);
    CHECK_THAT(potential(-0.4, cl), WithinAbs(0.8 - 0.08, 1e-15));
    CHECK(code_of([&] { potential(1.2, sys); }) == Errc::OutOfDomain);
}

TEST_CASE("mean escape time", "[analytic]") {
    const auto sys = make_piecewise_linear({2, 1}, 0.1);
    const auto r = mean_escape_time(0.0, sys, 1.0);
    REQUIRE(r.asymptotic);
    CHECK_THAT(r.asymptotics.prefactor, WithinRel(0.75 * 0.1, 1e-14));
    CHECK(r.asymptotics.exponent == 2.0);
    CHECK_THAT(*r.asymptotic, WithinRel(0.75 * 0.1 * std::exp(20.0), 1e-12));
    CHECK(r.asymptotics.potential(-1.0) == 2.0);

    // finite-difference boundary value problem
    const auto s2 = make_piecewise_linear({2, 1}, 0.2);
    for (double x0 : {0.0, 0.3, -0.6}) {
        CHECK_THAT(mean_escape_time(x0, s2, 1.0).exact, WithinRel(verify::escape_time_fd(x0, s2, 1.0, 4000), 1e-4));
    }
    // sloped drift, value from an independent 30-digit quadrature of the double integral
    const auto cs = make_piecewise_linear({2, 1, 0, 0, 1, -0.5, 0, 0}, 0.1);
    CHECK_THAT(mean_escape_time(0.1, cs, 1.0).exact, WithinRel(3583782545.05393, 1e-8));

    // ratio exact / asymptotic approaches 1
    double prev = INFINITY;
    for (double eps : {0.2, 0.1, 0.05}) {
        const auto e = mean_escape_time(0.0, sys.with_epsilon(eps), 1.0);
        const double dev = std::abs(std::exp(e.log_exact - *e.log_asymptotic) - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-6);

    const auto sym = mean_escape_time(0.0, make_piecewise_linear({1, 1}, 0.1), 1.0);
    CHECK(sym.degenerate);
    CHECK_FALSE(sym.asymptotic);
    CHECK(sym.exact > 0.0);

    CHECK(code_of([&] { mean_escape_time(1.0, sys, 1.0); }) == Errc::OutOfDomain);
    CHECK(code_of([] { mean_escape_time(0.0, make_piecewise_linear({1, 1, 0, 0, 2, 0, 0, 0}, 0.1), 0.5); }) ==
          Errc::OutOfDomain);
}
