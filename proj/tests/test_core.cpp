#include <catch_amalgamated.hpp>

#include "slidenoise/core.hpp"
#include "slidenoise/error.hpp"

using namespace slidenoise;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::Config;
}

}  // namespace

TEST_CASE("make_piecewise_linear validates its inputs", "[core]") {
    CHECK_NOTHROW(make_piecewise_linear({2, 1, 1, 0}, 0.01, 0.0));
    CHECK(code_of([] { make_piecewise_linear({-1, 1}, 0.01); }) == Errc::NonAttracting);
    CHECK(code_of([] { make_piecewise_linear({1, 0}, 0.01); }) == Errc::NonAttracting);
    CHECK(code_of([] { make_piecewise_linear({1, 1}, 0.0); }) == Errc::BadNoise);
    CHECK(code_of([] { make_piecewise_linear({1, 1}, 0.01, -0.5); }) == Errc::BadNoise);
}

TEST_CASE("coefficients read back unchanged", "[core]") {
    const PiecewiseLinearCoeffs c{2, 1, 0.5, -0.25, 0.3, -0.7, 1.5, 2.5};
    const auto sys = make_piecewise_linear(c, 0.02, 0.4);
    CHECK(sys.coeffs() == c);
    CHECK(sys.epsilon() == 0.02);
    CHECK(sys.kappa() == 0.4);
    CHECK(sys.with_epsilon(0.5).coeffs() == c);
}

TEST_CASE("branch evaluation of the drifts", "[core]") {
    const auto sys = make_piecewise_linear({1, 1}, 0.01);
    CHECK(sys.phi(-0.5) == 1.0);
    CHECK(sys.phi(0.5) == -1.0);
    CHECK(sys.phi(0.0) == 0.0);  // sgn(0) = 0

    const auto lin = make_piecewise_linear({2, 1, 1, 0, 1, -0.5, 3, 4}, 0.01);
    CHECK_THAT(lin.phi(-0.2), WithinAbs(2 - 0.2, 1e-15));
    CHECK_THAT(lin.phi(0.2), WithinAbs(-1 - 0.1, 1e-15));
    CHECK_THAT(lin.psi(-0.2), WithinAbs(1 - 0.6, 1e-15));
    CHECK_THAT(lin.psi(0.2), WithinAbs(0.8, 1e-15));
    CHECK(lin.psi(0.0) == 0.5);
}

TEST_CASE("drift_bound_radius", "[core]") {
    CHECK(drift_bound_radius(make_piecewise_linear({2, 1}, 0.01)) == 1.0);
    CHECK(drift_bound_radius(make_piecewise_linear({2, 1}, 0.01), 3.0) == 3.0);
    // left branch 2 + x stays above 1/2 down to x = -1
    CHECK(drift_bound_radius(make_piecewise_linear({2, 1, 0, 0, 1, 0, 0, 0}, 0.01)) == 1.0);
    // left branch 1 + 2x drops to 1/2 at x = -0.25
    CHECK_THAT(drift_bound_radius(make_piecewise_linear({1, 1, 0, 0, 2, 0, 0, 0}, 0.01)), WithinAbs(0.25, 1e-15));
    // right branch -1 + 2x rises to -1/2 at x = 0.25
    CHECK_THAT(drift_bound_radius(make_piecewise_linear({1, 1, 0, 0, 0, 2, 0, 0}, 0.01)), WithinAbs(0.25, 1e-15));
}

TEST_CASE("drift points toward the manifold inside the bound", "[core]") {
    for (const PiecewiseLinearCoeffs& c : {PiecewiseLinearCoeffs{2, 1, 0, 0, 1, 1, 0, 0},
                                           PiecewiseLinearCoeffs{1, 3, 0, 0, 2, -1, 0, 0},
                                           PiecewiseLinearCoeffs{0.5, 0.5, 0, 0, -4, 4, 0, 0}}) {
        const auto sys = make_piecewise_linear(c, 0.01);
        const auto field = drift_field(sys);
        const double half = 0.5 * std::min(c.a_left, c.a_right);
        for (int i = 1; i <= 200; ++i) {
            const double x = field.x_b * i / 200.0;
            CHECK(field.phi(-x) >= half - 1e-12);
            CHECK(field.phi(x) <= -half + 1e-12);
        }
    }
}

TEST_CASE("validity window", "[core]") {
    const ValidityWindow w;
    CHECK_THAT(w.lower(0.01), WithinRel(std::pow(0.01, 0.9), 1e-15));
    CHECK_THAT(w.upper(0.01), WithinRel(1e4, 1e-12));
    CHECK(w.contains(1.0, 0.01));
    CHECK_FALSE(w.contains(0.01, 0.01));
    CHECK(w.lower(0.5) < w.upper(0.5));
}

TEST_CASE("canonical relay matrices", "[core]") {
    const auto rs = canonical_relay(-0.06);
    CHECK(dot(rs.C, rs.B) == 1.0);
    CHECK(rs.C == Vec3{1, 0, 0});
    CHECK_THAT(rs.A[0][0], WithinAbs(1.15, 1e-15));
    CHECK_THAT(rs.A[1][0], WithinAbs(-99.94, 1e-12));
    CHECK(rs.A[2][0] == -5.0);
}

TEST_CASE("error codes carry their name", "[core]") {
    const Error e(Errc::OutOfDomain, "x too large");
    CHECK(e.code() == Errc::OutOfDomain);
    CHECK(std::string(e.what()) == "OutOfDomain: x too large");
}
