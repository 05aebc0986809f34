#include "etadrc/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "etadrc/errors.hpp"

namespace etadrc {

double effective_step(const SimConfig& cfg) {
    return cfg.step_policy ? std::min(cfg.step, 0.01 / (2.0 * cfg.design.r)) : cfg.step;
}

std::size_t step_count(const SimConfig& cfg) {
    return static_cast<std::size_t>(std::floor(cfg.horizon / effective_step(cfg) + 1e-9));
}

int default_record_stride(std::size_t steps) {
    constexpr std::size_t kMaxSamples = 200000;
    return static_cast<int>(std::max<std::size_t>(1, (steps + kMaxSamples) / kMaxSamples));
}

void check_config(const SimConfig& cfg) {
    cfg.design.check();
    const int n = cfg.spec.n;
    if (cfg.design.order() != n) throw InvalidDimensionError("design order does not match plant order");
    if (cfg.x0.size() != n) throw InvalidDimensionError("x0 must have n = " + std::to_string(n) + " entries");
    if (cfg.xhat0.size() != n + 1)
        throw InvalidDimensionError("xhat0 must have n+1 = " + std::to_string(n + 1) + " entries");
    if (!(cfg.horizon > 0.0)) throw DomainError("horizon must be > 0");
    if (!(cfg.step > 0.0)) throw DomainError("step must be > 0");
    if (effective_step(cfg) > cfg.horizon) throw DomainError("step exceeds horizon");
    if (cfg.record_stride < 1) throw DomainError("record_stride must be >= 1");
    if (cfg.noise.enabled && (!(cfg.noise.rho1 > 0.0) || !(cfg.noise.rho2 > 0.0)))
        throw DomainError("rho1, rho2 must be > 0");
}

namespace {

void append_sample(TrajectoryRecord& rec, const SimConfig& cfg, double t, const Vector& x, const Vector& xhat,
                   double u, double w1, double w2, double y_held, bool eso, bool ctrl) {
    rec.t.push_back(t);
    rec.x.insert(rec.x.end(), x.data(), x.data() + x.size());
    rec.xhat.insert(rec.xhat.end(), xhat.data(), xhat.data() + xhat.size());
    rec.xtotal.push_back(total_disturbance(cfg.spec, t, x, w1, w2));
    rec.u.push_back(u);
    rec.w1.push_back(w1);
    rec.w2.push_back(w2);
    rec.y_held.push_back(y_held);
    rec.trig_eso.push_back(eso ? 1 : 0);
    rec.trig_ctrl.push_back(ctrl ? 1 : 0);
}

bool diverged(const Vector& v) {
    for (double e : v)
        if (!std::isfinite(e)) return true;
    return v.norm() > kDivergenceBound;
}

}  // namespace

Trajectory run_trajectory(const SimConfig& cfg) {
    check_config(cfg);
    if (!cfg.force) {
        const auto report = validate_design(cfg.design, cfg.spec);
        if (!report.all_passed())
            throw PreconditionError("design validation failed; rerun with force to simulate anyway");
    }

    const int n = cfg.spec.n;
    const double h = effective_step(cfg);
    const std::size_t steps = step_count(cfg);
    const auto dwell = dwell_times(cfg.design);
    const auto r_powers = gain_powers(cfg.design.r, n);
    const auto stride = static_cast<std::size_t>(cfg.record_stride);

    Trajectory out;
    out.stream_id = cfg.stream_id;
    out.events.tau = dwell.tau;
    out.events.upsilon = dwell.upsilon;
    auto& rec = out.record;
    rec.n = n;
    const std::size_t samples = steps / stride + 1;
    rec.t.reserve(samples);
    rec.x.reserve(samples * static_cast<std::size_t>(n));
    rec.xhat.reserve(samples * static_cast<std::size_t>(n + 1));

    RngStream stream_b1(cfg.seed, cfg.stream_id, Substream::B1);
    RngStream stream_b2(cfg.seed, cfg.stream_id, Substream::B2);
    const bool noisy = cfg.noise.enabled;

    Vector x = cfg.x0;
    double b1 = 0.0;
    OuState ou{noisy ? cfg.noise.w2_initial : 0.0, cfg.noise.rho1, cfg.noise.rho2};
    double w1 = noisy ? bounded_noise(cfg.noise.bounded, 0.0, b1, cfg.check_assumptions) : 0.0;

    EsoState eso{cfg.xhat0, x[0], 0.0, 1};
    CtrlState ctrl{cfg.xhat0, 0.0, 1, control_value(cfg.xhat0, cfg.design)};
    out.events.eso.push_back({1, 0.0, eso.y_held});
    out.events.ctrl.push_back({1, 0.0, ctrl.u});
    append_sample(rec, cfg, 0.0, x, eso.xhat, ctrl.u, w1, ou.w2, eso.y_held, true, true);

    Vector dx(n);
    Vector dxhat(n + 1);
    bool pending_eso = false;
    bool pending_ctrl = false;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        plant_drift_into(cfg.spec, t, x, ctrl.u, w1, ou.w2, dx);
        eso_drift_into(eso, ctrl.u, cfg.design, cfg.spec, r_powers, dxhat);
        x.noalias() += h * dx;
        eso.xhat.noalias() += h * dxhat;

        const double t_next = static_cast<double>(k + 1) * h;
        if (noisy) {
            b1 += brownian_increment(stream_b1, h);
            ou = ou_step(ou, h, brownian_increment(stream_b2, h));
            w1 = bounded_noise(cfg.noise.bounded, t_next, b1, cfg.check_assumptions);
        }
        if (diverged(x) || diverged(eso.xhat))
            throw DivergenceError(t_next, cfg.stream_id,
                                  "closed loop diverged at t = " + format_double(t_next) + " (stream " +
                                      std::to_string(cfg.stream_id) + ")");

        if (etm1_should_trigger(x[0], eso, t_next, dwell.tau, cfg.design, n)) {
            eso = eso_on_trigger(eso, x[0], t_next);
            out.events.eso.push_back({eso.k, t_next, eso.y_held});
            pending_eso = true;
        }
        if (etm2_should_trigger(eso.xhat, ctrl, t_next, dwell.upsilon, cfg.design)) {
            ctrl = ctrl_on_trigger(ctrl, eso.xhat, t_next, cfg.design);
            out.events.ctrl.push_back({ctrl.l, t_next, ctrl.u});
            pending_ctrl = true;
        }
        if ((k + 1) % stride == 0) {
            append_sample(rec, cfg, t_next, x, eso.xhat, ctrl.u, w1, ou.w2, eso.y_held, pending_eso, pending_ctrl);
            pending_eso = pending_ctrl = false;
        }
    }
    return out;
}

std::vector<Trajectory> run_ensemble(const SimConfig& cfg, std::size_t count, unsigned threads,
                                     std::uint64_t first_stream) {
    if (count < 1) throw DomainError("ensemble size must be >= 1");
    check_config(cfg);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

    std::vector<Trajectory> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            SimConfig local = cfg;
            local.stream_id = first_stream + i;
            try {
                results[i] = run_trajectory(local);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

std::size_t dwell_violations(const std::vector<EventRecord>& events, double dwell) {
    std::size_t count = 0;
    for (std::size_t i = 1; i < events.size(); ++i)
        if (!(events[i].time - events[i - 1].time >= dwell)) ++count;
    return count;
}

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& rec) {
    const int n = rec.n;
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",x" << i;
    for (int i = 1; i <= n + 1; ++i) out << ",xhat" << i;
    out << ",xtotal,u,w1,w2,trig_eso,trig_ctrl\n";
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << format_double(rec.t[k]);
        for (int i = 0; i < n; ++i) out << ',' << format_double(rec.state(k, i));
        for (int i = 0; i <= n; ++i) out << ',' << format_double(rec.estimate(k, i));
        out << ',' << format_double(rec.xtotal[k]) << ',' << format_double(rec.u[k]) << ','
            << format_double(rec.w1[k]) << ',' << format_double(rec.w2[k]) << ',' << int(rec.trig_eso[k]) << ','
            << int(rec.trig_ctrl[k]) << '\n';
    }
}

void write_events_jsonl(std::ostream& out, const EventLog& log) {
    auto line = [&](const char* mech, const EventRecord& e) {
        out << "{\"mech\":\"" << mech << "\",\"idx\":" << e.index << ",\"t\":" << format_double(e.time) << "}\n";
    };
    std::size_t i = 0, j = 0;
    while (i < log.eso.size() || j < log.ctrl.size()) {
        if (j == log.ctrl.size() || (i < log.eso.size() && log.eso[i].time <= log.ctrl[j].time))
            line("eso", log.eso[i++]);
        else
            line("ctrl", log.ctrl[j++]);
    }
}

}  // namespace etadrc
