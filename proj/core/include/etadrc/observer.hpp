#pragma once

#include <cstdint>

#include "etadrc/gains.hpp"
#include "etadrc/plant.hpp"

namespace etadrc {

/// Event-triggered extended state observer.
///
/// Between sensor events the observer is driven by the held output
/// y(t_k); `y_held` is replaced only by eso_on_trigger.
struct EsoState {
    Vector xhat;          // xhat_1 .. xhat_{n+1}
    double y_held = 0.0;  // y(t_k)
    double t_last = 0.0;  // t_k
    std::uint64_t k = 0;  // events so far
};

/// Precomputed r^i, i = 0..n+1.
std::vector<double> gain_powers(double r, int n);

/// dxhat_i = xhat_{i+1} + lambda_i r^i (y_held - xhat_1) + g_i(xhat_1..xhat_i)   (i < n)
/// dxhat_n = xhat_{n+1} + lambda_n r^n (y_held - xhat_1) + g_n(xhat_1..xhat_n) + u
/// dxhat_{n+1} = lambda_{n+1} r^{n+1} (y_held - xhat_1)
Vector eso_drift(const EsoState& state, double u, const DesignGains& design, const SystemSpec& spec);
void eso_drift_into(const EsoState& state, double u, const DesignGains& design, const SystemSpec& spec,
                    std::span<const double> r_powers, Vector& out);

/// kappa_1 r^-(n+1/2)
double etm1_threshold(const DesignGains& design, int n);

/// Sensor rule: the dwell tau has elapsed and |y - y(t_k)| reached the
/// threshold. The dwell is tested as t - t_k >= tau, the same expression
/// the event-log scan uses.
bool etm1_should_trigger(double y_now, const EsoState& state, double t, double tau, const DesignGains& design, int n);

/// Records a sensor event: y_held <- y_now, t_last <- t, k <- k+1.
EsoState eso_on_trigger(const EsoState& state, double y_now, double t);
// Same, but throws ContractViolationError when the rule does not hold.
EsoState eso_on_trigger_checked(const EsoState& state, double y_now, double t, double tau, const DesignGains& design,
                                int n);

}  // namespace etadrc
