#pragma once

#include <cstdint>

#include "etadrc/gains.hpp"

namespace etadrc {

/// Sample-and-hold state of the event-triggered ADRC law. `u` always equals
/// control_value(xhat_held).
struct CtrlState {
    Vector xhat_held;     // xhat(t*_l), all n+1 components
    double t_last = 0.0;  // t*_l
    std::uint64_t l = 0;
    double u = 0.0;
};

/// u = sum_{i<=n} theta^{n+1-i} c_i xhat_i - xhat_{n+1}
double control_value(const Vector& xhat_held, const DesignGains& design);

/// kappa_2 r^-1/2
double etm2_threshold(const DesignGains& design);

/// Controller rule: dwell upsilon elapsed (t - t*_l >= upsilon) and
/// sum_i |xhat_i - xhat_i(t*_l)| reached the threshold.
bool etm2_should_trigger(const Vector& xhat_now, const CtrlState& state, double t, double upsilon,
                         const DesignGains& design);

CtrlState ctrl_on_trigger(const CtrlState& state, const Vector& xhat_now, double t, const DesignGains& design);
CtrlState ctrl_on_trigger_checked(const CtrlState& state, const Vector& xhat_now, double t, double upsilon,
                                  const DesignGains& design);

}  // namespace etadrc
