#include <doctest.h>

#include <cmath>
#include <random>

#include "etadrc/errors.hpp"
#include "etadrc/plant.hpp"

using namespace etadrc;

namespace {

// The example plant written out by hand.
Vector reference_drift(double t, const Vector& x, double u, double w1, double w2) {
    const double f = x[0] + 2 * x[1] + std::sin(t) + std::cos(x[0] + x[1]) + w1 * w1 * w1 + w2;
    return Vector{{x[1] + std::sin(x[0]), f + std::sin(x[0] + x[1]) + u}};
}

}  // namespace

TEST_SUITE("plant") {

TEST_CASE("reference plant at the initial state") {
    const auto spec = preset_system("paper-sec5");
    const Vector x{{0.5, -0.5}};
    const auto dx = plant_drift(spec, 0.0, x, 0.0, 0.0, 0.0);
    CHECK(dx[0] == doctest::Approx(-0.5 + std::sin(0.5)).epsilon(1e-15));
    CHECK(dx[0] == doctest::Approx(-0.0205744).epsilon(1e-6));
    CHECK(dx[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(total_disturbance(spec, 0.0, x, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("silent plant has zero drift") {
    const auto spec = preset_system("silent");
    const Vector x = Vector::Zero(2);
    CHECK(plant_drift(spec, 3.0, x, 0.0, 0.0, 0.0) == Vector::Zero(2));
    CHECK(total_disturbance(spec, 1.0, Vector{{4.0, 5.0}}, 1.0, 1.0) == 0.0);
}

TEST_CASE("random inputs match the straight-line evaluation") {
    const auto spec = preset_system("paper-sec5");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = u(rng) + 3.0, uu = u(rng), w1 = u(rng), w2 = u(rng);
        const Vector x{{u(rng), u(rng)}};
        const auto dx = plant_drift(spec, t, x, uu, w1, w2);
        const auto ref = reference_drift(t, x, uu, w1, w2);
        CHECK(dx[0] == doctest::Approx(ref[0]).epsilon(1e-14));
        CHECK(dx[1] == doctest::Approx(ref[1]).epsilon(1e-14));
        // Algebraic consistency: last channel = f + g_n + u exactly.
        CHECK(dx[1] - total_disturbance(spec, t, x, w1, w2) - std::sin(x[0] + x[1]) - uu ==
              doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
    }
}

TEST_CASE("linear plant is x1 + 2 x2 regardless of noise") {
    const auto spec = preset_system("linear-n2");
    const Vector x{{0.3, -0.7}};
    CHECK(total_disturbance(spec, 2.0, x, 5.0, -4.0) == doctest::Approx(0.3 - 1.4));
    const auto dx = plant_drift(spec, 2.0, x, 1.0, 5.0, -4.0);
    CHECK(dx[0] == -0.7);
    CHECK(dx[1] == doctest::Approx(0.3 - 1.4 + 1.0));
}

TEST_CASE("make_system errors") {
    CHECK_THROWS_AS(make_system(2, "nope", {"zero", "zero"}, {0, 0}, {}), ConfigError);
    CHECK_THROWS_AS(make_system(2, "zero", {"zero", "nope"}, {0, 0}, {}), ConfigError);
    CHECK_THROWS_AS(make_system(2, "zero", {"zero"}, {0, 0}, {}), InvalidDimensionError);
    CHECK_THROWS_AS(make_system(2, "zero", {"zero", "zero"}, {0}, {}), InvalidDimensionError);
    CHECK_THROWS_AS(make_system(2, "zero", {"zero", "zero"}, {-1, 0}, {}), DomainError);
    CHECK_THROWS_AS(make_system(1, "paper-sec5", {"zero"}, {0}, {}), InvalidDimensionError);
    CHECK_THROWS_AS(preset_system("nope"), ConfigError);
    CHECK_THROWS_AS(plant_drift(preset_system("silent"), 0.0, Vector::Zero(3), 0, 0, 0), InvalidDimensionError);
}

TEST_CASE("couplings must vanish at the origin") {
    auto spec = preset_system("silent");
    CHECK_NOTHROW(check_couplings_vanish(spec));
    spec.g[1] = [](std::span<const double> xbar) { return std::cos(xbar[0] + xbar[1]); };
    try {
        check_couplings_vanish(spec);
        FAIL("expected an A1 violation");
    } catch (const AssumptionViolationError& e) {
        CHECK(e.assumption() == "A1");
    }
}

TEST_CASE("sampled Lipschitz check") {
    // sin(x1) has L = 1; sin(x1 + x2) has Euclidean L = sqrt(2), above the
    // declared 1, and the sampled ratio shows it.
    const auto spec = preset_system("paper-sec5");
    const double ratio = sampled_lipschitz_ratio(spec, 20000, 3.0, 5);
    CHECK(ratio > 1.0);
    CHECK(ratio <= std::sqrt(2.0) + 1e-12);

    auto one = spec;
    one.lipschitz = {1.0, std::sqrt(2.0)};
    CHECK(sampled_lipschitz_ratio(one, 20000, 3.0, 5) <= 1.0 + 1e-12);
    CHECK(sampled_lipschitz_ratio(preset_system("silent"), 100, 1.0, 5) == 0.0);
}

TEST_CASE("zero plant under Euler follows the integrator chain") {
    // f = g = 0, u = 1: x2 = t, x1 = x1(0) + t^2/2; Euler is exact for x2
    // and O(h) for x1.
    const auto spec = preset_system("silent");
    const double h = 1e-3;
    Vector x{{0.25, 0.0}};
    for (int k = 0; k < 1000; ++k) x += h * plant_drift(spec, k * h, x, 1.0, 0.0, 0.0);
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(x[0] - 0.75) <= h);
}

}  // TEST_SUITE
