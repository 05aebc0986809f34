#include <doctest.h>

#include <cmath>
#include <sstream>

#include "etadrc/config.hpp"
#include "etadrc/errors.hpp"
#include "etadrc/simulator.hpp"

using namespace etadrc;

namespace {

SimConfig short_example(double horizon = 2.0) {
    auto c = preset_config("paper-sec5").sim;
    c.horizon = horizon;
    c.record_stride = 1;
    return c;
}

bool same(const Trajectory& a, const Trajectory& b) {
    const auto& x = a.record;
    const auto& y = b.record;
    auto ev_eq = [](const std::vector<EventRecord>& p, const std::vector<EventRecord>& q) {
        if (p.size() != q.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i].index != q[i].index || p[i].time != q[i].time || p[i].held != q[i].held) return false;
        return true;
    };
    return a.stream_id == b.stream_id && x.t == y.t && x.x == y.x && x.xhat == y.xhat && x.xtotal == y.xtotal &&
           x.u == y.u && x.w1 == y.w1 && x.w2 == y.w2 && x.y_held == y.y_held && x.trig_eso == y.trig_eso &&
           x.trig_ctrl == y.trig_ctrl && ev_eq(a.events.eso, b.events.eso) && ev_eq(a.events.ctrl, b.events.ctrl);
}

// Zero-tolerance scan of one mechanism's log.
void check_log(const std::vector<EventRecord>& events, double dwell) {
    REQUIRE_FALSE(events.empty());
    CHECK(events.front().time == 0.0);
    CHECK(events.front().index == 1);
    for (std::size_t i = 1; i < events.size(); ++i) {
        CHECK(events[i].time > events[i - 1].time);
        CHECK(events[i].time - events[i - 1].time >= dwell);
        CHECK(events[i].index == i + 1);
    }
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("step policy and record length") {
    auto c = short_example();
    CHECK(effective_step(c) == 1e-4);
    c.design.r = 100;
    CHECK(effective_step(c) == 5e-5);
    c.step_policy = false;
    CHECK(effective_step(c) == 1e-4);

    c = short_example(1.0);
    c.record_stride = 7;
    const auto tr = run_trajectory(c);
    CHECK(tr.record.size() == static_cast<std::size_t>(std::floor(1.0 / (1e-4 * 7))) + 1);
    for (std::size_t k = 1; k < tr.record.size(); ++k) CHECK(tr.record.t[k] > tr.record.t[k - 1]);
    CHECK(default_record_stride(200000) == 2);
    CHECK(default_record_stride(199999) == 1);
}

TEST_CASE("config checks") {
    auto c = short_example();
    c.x0 = Vector::Zero(3);
    CHECK_THROWS_AS(run_trajectory(c), InvalidDimensionError);
    c = short_example();
    c.step = 5.0;
    c.step_policy = false;
    CHECK_THROWS_AS(run_trajectory(c), DomainError);
    c = short_example();
    c.record_stride = 0;
    CHECK_THROWS_AS(run_trajectory(c), DomainError);
    c = short_example();
    c.design.theta = 1;
    CHECK_THROWS_AS(run_trajectory(c), PreconditionError);
}

TEST_CASE("same seed gives bit-identical runs, other seeds differ") {
    const auto c = short_example(1.0);
    const auto a = run_trajectory(c);
    const auto b = run_trajectory(c);
    CHECK(same(a, b));
    auto c2 = c;
    c2.seed = 1;
    CHECK_FALSE(same(a, run_trajectory(c2)));
}

TEST_CASE("silent preset stays at zero with only the initial events") {
    const auto c = preset_config("silent").sim;
    const auto tr = run_trajectory(c);
    for (double v : tr.record.x) CHECK(v == 0.0);
    for (double v : tr.record.xhat) CHECK(v == 0.0);
    for (double v : tr.record.u) CHECK(v == 0.0);
    CHECK(tr.events.eso.size() == 1);
    CHECK(tr.events.ctrl.size() == 1);
}

TEST_CASE("event logs respect dwell and holds are piecewise constant") {
    const auto c = short_example(2.0);
    const auto tr = run_trajectory(c);
    check_log(tr.events.eso, tr.events.tau);
    check_log(tr.events.ctrl, tr.events.upsilon);
    CHECK(dwell_violations(tr.events.eso, tr.events.tau) == 0);
    CHECK(dwell_violations(tr.events.ctrl, tr.events.upsilon) == 0);
    CHECK(tr.events.tau == doctest::Approx(std::pow(50.0, -5.5)));

    const auto& rec = tr.record;
    std::size_t eso_flags = 0, ctrl_flags = 0;
    for (std::size_t k = 1; k < rec.size(); ++k) {
        if (!rec.trig_ctrl[k]) CHECK(rec.u[k] == rec.u[k - 1]);
        if (!rec.trig_eso[k]) CHECK(rec.y_held[k] == rec.y_held[k - 1]);
        eso_flags += rec.trig_eso[k];
        ctrl_flags += rec.trig_ctrl[k];
    }
    // stride 1: one flag per event after the initial one
    CHECK(eso_flags == tr.events.eso.size() - 1);
    CHECK(ctrl_flags == tr.events.ctrl.size() - 1);
    // held values in the log match the record
    for (const auto& e : tr.events.ctrl) {
        const auto k = static_cast<std::size_t>(std::llround(e.time / 1e-4));
        CHECK(rec.u[k] == e.held);
    }
}

TEST_CASE("flags accumulate across a record stride") {
    auto c = short_example(1.0);
    c.record_stride = 10;
    const auto tr = run_trajectory(c);
    std::size_t flagged = 0;
    for (auto f : tr.record.trig_ctrl) flagged += f;
    std::vector<long> buckets;
    for (const auto& e : tr.events.ctrl) buckets.push_back(static_cast<long>(std::ceil(e.time / 1e-3 - 1e-9)));
    buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
    CHECK(flagged == buckets.size());
}

TEST_CASE("ensemble ordering, N=1 equivalence, thread independence") {
    const auto c = short_example(0.5);
    const auto one = run_ensemble(c, 1);
    CHECK(same(one[0], run_trajectory(c)));

    const auto serial = run_ensemble(c, 5, 1);
    const auto parallel = run_ensemble(c, 5, 3);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(serial[i].stream_id == i);
        CHECK(same(serial[i], parallel[i]));
    }
    const auto offset = run_ensemble(c, 2, 1, 3);
    CHECK(same(offset[0], serial[3]));
    CHECK_THROWS_AS(run_ensemble(c, 0), DomainError);
}

TEST_CASE("divergence carries time and stream") {
    auto c = short_example(20.0);
    c.design.cs = {1.0, 1.0};
    c.force = true;
    try {
        run_ensemble(c, 2, 1);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() < 20.0);
        CHECK(e.stream_id() == 0);
    }
}

TEST_CASE("stationary colored noise across an ensemble") {
    // Zero plant, noise on: only w2 evolves; E w2(20)^2 -> rho1 rho2.
    auto c = preset_config("silent").sim;
    c.noise.enabled = true;
    c.noise.bounded = make_bounded_noise("sin_t_plus_b", 2.0, 2.0);
    c.horizon = 20.0;
    c.design.r = 0.5;  // step policy then allows h = 0.01
    c.step = 0.01;
    c.force = true;
    c.record_stride = 2000;
    const std::size_t n = 1000;
    const auto paths = run_ensemble(c, n);
    double sum = 0.0, sum4 = 0.0;
    for (const auto& p : paths) {
        const double w = p.record.w2.back();
        sum += w * w;
        sum4 += w * w * w * w;
        CHECK(p.record.x.back() == 0.0);
    }
    const double m2 = sum / n;
    const double sd = std::sqrt((sum4 / n - m2 * m2) / n);
    CHECK(std::abs(m2 - 2.25) < 3.0 * sd);
}

TEST_CASE("deterministic skeleton converges") {
    auto c = preset_config("paper-sec5").sim;
    c.noise.enabled = false;
    const auto tr = run_trajectory(c);
    const auto k = tr.record.size() - 1;
    CHECK(tr.record.t[k] == doctest::Approx(20.0));
    CHECK(std::hypot(tr.record.state(k, 0), tr.record.state(k, 1)) < 0.05);
}

TEST_CASE("first-order convergence in h with continuous supervision") {
    // Thresholds and dwell times shrunk to nothing make every grid point an
    // event, leaving plain Euler; with the nominal thresholds the grid
    // quantization of event times dominates instead.
    auto c = preset_config("linear-n2").sim;
    c.horizon = 1.0;
    c.step_policy = false;
    c.design.r = 10;
    c.design.eps1 = c.design.eps2 = 1e-12;
    c.design.kappa1 = c.design.kappa2 = 1e-12;
    std::vector<Vector> ends;
    for (double h : {8e-5, 4e-5, 2e-5, 1e-5}) {
        c.step = h;
        c.record_stride = static_cast<int>(std::llround(1.0 / h));
        const auto tr = run_trajectory(c);
        const auto k = tr.record.size() - 1;
        REQUIRE(tr.record.t[k] == doctest::Approx(1.0));
        ends.push_back(Vector{{tr.record.state(k, 0), tr.record.state(k, 1)}});
    }
    for (std::size_t i = 0; i + 2 < ends.size(); ++i) {
        const double ratio = (ends[i] - ends[i + 1]).norm() / (ends[i + 1] - ends[i + 2]).norm();
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("high-gain observer error within 10/r by t = 1") {
    for (double r : {20.0, 50.0}) {
        auto c = preset_config("linear-n2").sim;
        c.design.r = r;
        c.horizon = 1.0;
        const auto tr = run_trajectory(c);
        const auto k = tr.record.size() - 1;
        for (int i = 0; i < 2; ++i) CHECK(std::abs(tr.record.state(k, i) - tr.record.estimate(k, i)) < 10.0 / r);
    }
}

TEST_CASE("CSV and JSONL formats") {
    TrajectoryRecord rec;
    rec.n = 1;
    rec.t = {0.0, 0.1};
    rec.x = {1.0, 0.5};
    rec.xhat = {0.0, 0.0, 0.25, 1.0 / 3.0};
    rec.xtotal = {0.0, 0.0};
    rec.u = {0.0, -1.0};
    rec.w1 = {0.0, 0.0};
    rec.w2 = {0.0, 0.0};
    rec.y_held = {1.0, 1.0};
    rec.trig_eso = {1, 0};
    rec.trig_ctrl = {1, 1};
    std::ostringstream csv;
    write_trajectory_csv(csv, rec);
    CHECK(csv.str() ==
          "t,x1,xhat1,xhat2,xtotal,u,w1,w2,trig_eso,trig_ctrl\n"
          "0,1,0,0,0,0,0,0,1,1\n"
          "0.1,0.5,0.25,0.3333333333333333,0,-1,0,0,0,1\n");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);

    EventLog log;
    log.eso = {{1, 0.0, 0.0}, {2, 0.5, 0.0}};
    log.ctrl = {{1, 0.0, 0.0}, {2, 0.25, 0.0}, {3, 0.5, 0.0}};
    std::ostringstream jsonl;
    write_events_jsonl(jsonl, log);
    CHECK(jsonl.str() ==
          "{\"mech\":\"eso\",\"idx\":1,\"t\":0}\n"
          "{\"mech\":\"ctrl\",\"idx\":1,\"t\":0}\n"
          "{\"mech\":\"ctrl\",\"idx\":2,\"t\":0.25}\n"
          "{\"mech\":\"eso\",\"idx\":2,\"t\":0.5}\n"
          "{\"mech\":\"ctrl\",\"idx\":3,\"t\":0.5}\n");
}

}  // TEST_SUITE
