#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "etadrc/controller.hpp"
#include "etadrc/gains.hpp"
#include "etadrc/noise.hpp"
#include "etadrc/observer.hpp"
#include "etadrc/plant.hpp"

namespace etadrc {

struct NoiseConfig {
    BoundedNoiseSpec bounded;
    double rho1 = 1.5;
    double rho2 = 1.5;
    double w2_initial = 0.0;
    bool enabled = true;  // false: w1 = w2 = 0 and no random draws
};

struct SimConfig {
    SystemSpec spec;
    DesignGains design;
    NoiseConfig noise;
    Vector x0;
    Vector xhat0;
    double horizon = 20.0;
    double step = 1e-4;       // requested; see effective_step
    int record_stride = 1;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    bool check_assumptions = false;  // sampled |psi| <= alpha5 check each step
    bool force = false;              // run even if validate_design fails
    bool step_policy = true;         // false: integrate with `step` as given
};

/// min(step, 0.01 / (2 r)): the nominal observer error poles sit near -2r.
/// Returns `step` unchanged when the policy is switched off.
double effective_step(const SimConfig& cfg);
std::size_t step_count(const SimConfig& cfg);
/// Smallest stride keeping a run at or below 200k recorded samples.
int default_record_stride(std::size_t steps);

/// Throws on inconsistent dimensions or non-positive horizon/step.
void check_config(const SimConfig& cfg);

inline constexpr double kDivergenceBound = 1e9;

/// Time-gridded closed-loop history. Per-sample arrays are row-major.
/// Trigger flags mark an event in (previous sample, this sample].
struct TrajectoryRecord {
    int n = 0;
    std::vector<double> t;
    std::vector<double> x;       // size() * n
    std::vector<double> xhat;    // size() * (n+1)
    std::vector<double> xtotal;  // f(t, x, w1, w2)
    std::vector<double> u;
    std::vector<double> w1;
    std::vector<double> w2;
    std::vector<double> y_held;
    std::vector<std::uint8_t> trig_eso;
    std::vector<std::uint8_t> trig_ctrl;

    std::size_t size() const noexcept { return t.size(); }
    double state(std::size_t k, int i) const { return x[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)]; }
    double estimate(std::size_t k, int i) const {
        return xhat[k * static_cast<std::size_t>(n + 1) + static_cast<std::size_t>(i)];
    }
    /// x_i with the extended state x_{n+1} = xtotal, 0-based i in [0, n].
    double extended_state(std::size_t k, int i) const { return i < n ? state(k, i) : xtotal[k]; }
};

struct EventRecord {
    std::uint64_t index = 0;  // 1-based, the initial event at t = 0 is 1
    double time = 0.0;
    double held = 0.0;  // y(t_k) for the sensor, u for the controller
};

struct EventLog {
    std::vector<EventRecord> eso;
    std::vector<EventRecord> ctrl;
    double tau = 0.0;
    double upsilon = 0.0;
};

struct Trajectory {
    std::uint64_t stream_id = 0;
    TrajectoryRecord record;
    EventLog events;
};

/// Fixed-step Euler-Maruyama closed loop. Per step: plant and observer
/// drifts at t_k with the current holds, joint Euler update, noise advance,
/// then the sensor rule and the controller rule at t_{k+1} (in that order).
/// Throws DivergenceError when a state turns non-finite or exceeds
/// kDivergenceBound, PreconditionError when validation fails without force.
Trajectory run_trajectory(const SimConfig& cfg);

/// N trajectories with stream_id first..first+N-1, ordered by stream_id.
/// threads = 0 uses the hardware concurrency.
std::vector<Trajectory> run_ensemble(const SimConfig& cfg, std::size_t count, unsigned threads = 0,
                                     std::uint64_t first_stream = 0);

/// Number of consecutive-pair gaps below the dwell (must be 0).
std::size_t dwell_violations(const std::vector<EventRecord>& events, double dwell);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// Header t,x1..xn,xhat1..xhat{n+1},xtotal,u,w1,w2,trig_eso,trig_ctrl
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);
/// One {"mech":..,"idx":..,"t":..} object per line in time order; a sensor
/// event precedes a controller event at the same instant.
void write_events_jsonl(std::ostream& out, const EventLog& log);

}  // namespace etadrc
