#include <doctest.h>

#include <cmath>

#include "etadrc/controller.hpp"
#include "etadrc/errors.hpp"

using namespace etadrc;

namespace {

DesignGains section5() {
    DesignGains d;
    d.lambdas = {6, 12, 8};
    d.cs = {-1, -2};
    d.r = 50;
    d.theta = 7;
    return d;
}

}  // namespace

TEST_SUITE("controller") {

TEST_CASE("control law values") {
    const auto d = section5();
    CHECK(control_value(Vector{{1, 0, 0}}, d) == -49.0);
    CHECK(control_value(Vector{{0, 1, 0}}, d) == -14.0);
    CHECK(control_value(Vector{{0, 0, 1}}, d) == -1.0);
    const double zero = control_value(Vector::Zero(3), d);
    CHECK(zero == 0.0);
    CHECK_FALSE(std::signbit(zero));

    auto unit = d;
    unit.theta = 1;
    CHECK(control_value(Vector{{1, 1, 1}}, unit) == -4.0);
    CHECK_THROWS_AS(control_value(Vector::Zero(2), d), InvalidDimensionError);
}

TEST_CASE("controller rule threshold and dwell") {
    const auto d = section5();
    CHECK(etm2_threshold(d) == doctest::Approx(1.0 / std::sqrt(50.0)).epsilon(1e-15));
    CHECK(etm2_threshold(d) == doctest::Approx(0.141421).epsilon(1e-5));

    const double ups = std::pow(50.0, -7.0 / 3.0);
    const CtrlState st{Vector::Zero(3), 1.0, 4, 0.0};
    CHECK(etm2_should_trigger(Vector{{0.1, -0.05, 0.05}}, st, 1.0 + ups, ups, d));
    CHECK_FALSE(etm2_should_trigger(Vector{{0.1, -0.05, 0.05}}, st, 1.0 + 0.5 * ups, ups, d));
    CHECK_FALSE(etm2_should_trigger(Vector{{100, 0, 0}}, st, 1.0, ups, d));
    CHECK_FALSE(etm2_should_trigger(Vector{{0.05, 0.05, 0.0}}, st, 2.0, ups, d));

    // Inclusive boundary with an exactly representable threshold.
    auto d2 = d;
    d2.kappa2 = 0.25 * std::sqrt(50.0);
    const double thr = etm2_threshold(d2);
    CHECK(etm2_should_trigger(Vector{{thr, 0, 0}}, st, 2.0, ups, d2));
    CHECK_FALSE(etm2_should_trigger(Vector{{std::nextafter(thr, 0.0), 0, 0}}, st, 2.0, ups, d2));
}

TEST_CASE("controller bookkeeping") {
    const auto d = section5();
    const CtrlState st{Vector::Zero(3), 0.0, 1, 0.0};
    const Vector now{{1.0, 0.0, 0.0}};
    const auto next = ctrl_on_trigger(st, now, 0.5, d);
    CHECK(next.xhat_held == now);
    CHECK(next.t_last == 0.5);
    CHECK(next.l == 2);
    CHECK(next.u == -49.0);

    CHECK_THROWS_AS(ctrl_on_trigger_checked(st, now, 1e-9, 1e-3, d), ContractViolationError);
    CHECK_THROWS_AS(ctrl_on_trigger_checked(st, Vector::Zero(3), 1.0, 1e-3, d), ContractViolationError);
    CHECK(ctrl_on_trigger_checked(st, now, 1.0, 1e-3, d).u == -49.0);
}

}  // TEST_SUITE
