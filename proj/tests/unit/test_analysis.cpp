#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etadrc/analysis.hpp"
#include "etadrc/config.hpp"
#include "etadrc/errors.hpp"

using namespace etadrc;

namespace {

// n = 1 record on t = 0, 1, 2 with constant estimates.
Trajectory toy(std::uint64_t id, std::vector<double> x, std::vector<double> total, std::vector<double> xh1,
               std::vector<double> xh2) {
    Trajectory tr;
    tr.stream_id = id;
    auto& r = tr.record;
    r.n = 1;
    r.t = {0.0, 1.0, 2.0};
    r.x = x;
    r.xtotal = total;
    for (std::size_t k = 0; k < 3; ++k) {
        r.xhat.push_back(xh1[k]);
        r.xhat.push_back(xh2[k]);
    }
    r.u = r.w1 = r.w2 = r.y_held = {0, 0, 0};
    r.trig_eso = r.trig_ctrl = {1, 0, 0};
    tr.events.eso = {{1, 0.0, 0.0}};
    tr.events.ctrl = {{1, 0.0, 0.0}};
    tr.events.tau = tr.events.upsilon = 0.1;
    return tr;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("zero trajectory gives zero moments") {
    const std::vector<Trajectory> e{toy(0, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0})};
    const auto s = mc_summary(e, 0.5);
    for (const auto& row : s.mse)
        for (double v : row) CHECK(v == 0.0);
    for (double v : s.window_mse) CHECK(v == 0.0);
    CHECK(s.window_magnitude == 0.0);
    CHECK(s.sup_error[0].max == 0.0);
    CHECK(s.events.eso.count_min == 1);
}

TEST_CASE("two-path toy against hand computation") {
    // path a: x = (1, 2, 3), xhat1 = 0 -> e1^2 = 1, 4, 9; xtotal = 0, xhat2 = 1 -> e2^2 = 1
    // path b: x = (-1, 0, 1), xhat1 = 0 -> 1, 0, 1;     xtotal = 2, xhat2 = 0 -> 4
    const std::vector<Trajectory> e{toy(0, {1, 2, 3}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}),
                                    toy(1, {-1, 0, 1}, {2, 2, 2}, {0, 0, 0}, {0, 0, 0})};
    const auto s = mc_summary(e, 1.0);
    CHECK(s.mse[0] == std::vector<double>{1.0, 2.0, 5.0});
    CHECK(s.mse[1] == std::vector<double>{2.5, 2.5, 2.5});
    CHECK(s.mean_square[0] == std::vector<double>{1.0, 2.0, 5.0});
    // window t >= 1: points 1 and 2
    CHECK(s.window_mse[0] == 3.5);
    CHECK(s.window_mse[1] == 2.5);
    CHECK(s.window_magnitude == 3.5);
    // per-path window means 6.5 and 0.5 -> sample sd sqrt(18), stderr 3
    CHECK(s.window_mse_stderr[0] == doctest::Approx(3.0));
    // sup |e1| over the window: 3 and 1
    CHECK(s.sup_error[0].max == 3.0);
    CHECK(s.sup_error[0].median == 2.0);
    CHECK(s.sup_state[0].q90 == doctest::Approx(2.8));
    CHECK(s.paths == 2);
    CHECK(s.stream_ids == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("mc_summary is permutation invariant") {
    const auto c = [] {
        auto s = preset_config("paper-sec5").sim;
        s.horizon = 0.5;
        s.record_stride = 10;
        return s;
    }();
    auto e = run_ensemble(c, 6, 1);
    const auto a = to_json(mc_summary(e, 0.25)).dump();
    std::reverse(e.begin(), e.end());
    std::swap(e[1], e[4]);
    const auto b = to_json(mc_summary(e, 0.25)).dump();
    CHECK(a == b);
    // chunked streaming gives the same summary
    CHECK(to_json(run_mc_summary(c, 6, 0.25, 2)).dump() == a);
}

TEST_CASE("mc_summary preconditions") {
    CHECK_THROWS_AS(mc_summary({}, 0.0), DomainError);
    const std::vector<Trajectory> e{toy(0, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0})};
    CHECK_THROWS_AS(mc_summary(e, 2.0), DomainError);
    auto other = toy(1, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0});
    other.record.t[2] = 3.0;
    const std::vector<Trajectory> mixed{e[0], other};
    CHECK_THROWS_AS(mc_summary(mixed, 0.5), InvalidDimensionError);
    CHECK_THROWS_AS(McAccumulator(0.0).finish(), DomainError);
}

TEST_CASE("event_stats on a hand-built log") {
    EventLog log;
    log.eso = {{1, 0.0, 0.0}, {2, 1.0, 0.0}, {3, 2.0, 0.0}};
    log.ctrl = {{1, 0.0, 0.0}, {2, 0.05, 0.0}};
    log.tau = 1.0;
    log.upsilon = 0.1;
    const std::vector<EventLog> logs{log};
    const auto r = event_stats(std::span<const EventLog>(logs), 2.0);
    CHECK(r.eso.count_mean == 3.0);
    CHECK(r.eso.count_min == 3);
    CHECK(r.eso.gap_min == 1.0);
    CHECK(r.eso.gap_median == 1.0);
    CHECK(r.eso.dwell_violations == 0);
    CHECK(r.ctrl.dwell_violations == 1);
    CHECK_THROWS_AS(event_stats(std::span<const EventLog>{}, 1.0), DomainError);
}

TEST_CASE("quantiles and slope") {
    const auto q = quantiles({4, 1, 3, 2, 5});
    CHECK(q.median == 3.0);
    CHECK(q.q90 == doctest::Approx(4.6));
    CHECK(q.max == 5.0);
    const std::vector<double> x{10, 20, 40}, y{1e-2, 1e-2 / 32, 1e-2 / 1024};
    CHECK(loglog_slope(x, y) == doctest::Approx(-5.0));
    CHECK_THROWS_AS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), DomainError);
}

TEST_CASE("scaling study on the linear plant") {
    auto base = preset_config("linear-n2").sim;
    base.horizon = 4.0;
    base.record_stride = 10;
    const std::vector<double> rs{10, 20, 40};
    const auto rep = scaling_study(base, rs, 2, 0.75);
    REQUIRE(rep.succeeded() == 3);
    for (bool d : rep.error_decreasing) CHECK(d);
    CHECK(rep.ordering_at_largest_r);
    CHECK(rep.magnitude_decreasing);
    // slope ladder: most negative for x1
    CHECK(rep.error_slopes[2] <= -0.5);
    CHECK(rep.error_slopes[0] < rep.error_slopes[1]);
    CHECK(rep.error_slopes[1] < rep.error_slopes[2]);
    // sup error quantiles shrink with r
    CHECK(rep.points[2].summary.sup_error[0].median < rep.points[0].summary.sup_error[0].median);

    std::ostringstream csv;
    write_scaling_curves_csv(csv, rep);
    CHECK(csv.str().rfind("r,t,mse1,mse2,mse3,ms1,ms2\n", 0) == 0);
    const auto j = to_json(rep);
    CHECK(j["kind"] == "scaling_report");
    CHECK(j["points"].size() == 3);
}

TEST_CASE("scaling study records failures and validates r") {
    auto base = preset_config("linear-n2").sim;
    base.horizon = 1.0;
    const std::vector<double> one{10};
    CHECK_THROWS_AS(scaling_study(base, one, 1), DomainError);
    const std::vector<double> unsorted{20, 10};
    CHECK_THROWS_AS(scaling_study(base, unsorted, 1), DomainError);

    base.design.cs = {1.0, 1.0};  // J not Hurwitz: every r fails validation
    const std::vector<double> rs{10, 20};
    const auto rep = scaling_study(base, rs, 1);
    CHECK(rep.succeeded() == 0);
    CHECK_FALSE(rep.points[0].failure.empty());
    CHECK(std::any_of(rep.warnings.begin(), rep.warnings.end(),
                      [](const std::string& w) { return w.find("single path") != std::string::npos; }));
}

}  // TEST_SUITE
