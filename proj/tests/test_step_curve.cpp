#include <doctest.h>

#include "delaycredit/errors.hpp"
#include "delaycredit/step_curve.hpp"

using namespace delaycredit;

TEST_CASE("step curve is right-continuous and flat-extended") {
    StepCurve c({2000.0, 2001.0}, {0.05, 0.04});
    CHECK(c(2000.75) == 0.05);
    CHECK(c(2001.0) == 0.04);
    CHECK(c(1999.0) == 0.05);
    CHECK(c(2050.0) == 0.04);
}

TEST_CASE("step curve integrates exactly across knots") {
    StepCurve c({0.0, 1.0, 2.0}, {1.0, 2.0, 4.0});
    CHECK(c.integrate(0.0, 3.0) == doctest::Approx(1.0 + 2.0 + 4.0).epsilon(1e-15));
    CHECK(c.integrate(0.5, 1.5) == doctest::Approx(0.5 + 1.0).epsilon(1e-15));
    CHECK(c.integrate(1.0, 1.0) == 0.0);
}

TEST_CASE("shifted curve relocates the origin") {
    StepCurve c({2000.0, 2001.0}, {0.05, 0.04});
    StepCurve s = c.shifted(2000.5);
    CHECK(s(-0.25) == 0.05);
    CHECK(s(0.5) == 0.04);
}

TEST_CASE("constant curve") {
    StepCurve c = StepCurve::constant(0.07);
    CHECK(c(-5.0) == 0.07);
    CHECK(c(17.0) == 0.07);
    CHECK(c.integrate(0.0, 2.0) == doctest::Approx(0.14));
}

TEST_CASE("invalid construction is rejected") {
    CHECK_THROWS_AS(StepCurve({1.0, 0.0}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(StepCurve({}, {}), Error);
}
