#include "etadrc/controller.hpp"

#include <cmath>

#include "etadrc/errors.hpp"

namespace etadrc {

double control_value(const Vector& xhat_held, const DesignGains& design) {
    const int n = design.order();
    if (xhat_held.size() != n + 1)
        throw InvalidDimensionError("held observer vector has length " + std::to_string(xhat_held.size()) +
                                    ", expected " + std::to_string(n + 1));
    double u = 0.0;
    double scale = 1.0;  // theta^{n+1-i}, built from i = n downwards
    for (int i = n - 1; i >= 0; --i) {
        scale *= design.theta;
        u += scale * design.cs[static_cast<std::size_t>(i)] * xhat_held[i];
    }
    return u - xhat_held[n];
}

double etm2_threshold(const DesignGains& design) { return design.kappa2 / std::sqrt(design.r); }

bool etm2_should_trigger(const Vector& xhat_now, const CtrlState& state, double t, double upsilon,
                         const DesignGains& design) {
    if (t - state.t_last < upsilon) return false;
    if (xhat_now.size() != state.xhat_held.size())
        throw InvalidDimensionError("observer vector length does not match held vector");
    return (xhat_now - state.xhat_held).lpNorm<1>() >= etm2_threshold(design);
}

CtrlState ctrl_on_trigger(const CtrlState& state, const Vector& xhat_now, double t, const DesignGains& design) {
    CtrlState next = state;
    next.xhat_held = xhat_now;
    next.t_last = t;
    ++next.l;
    next.u = control_value(xhat_now, design);
    return next;
}

CtrlState ctrl_on_trigger_checked(const CtrlState& state, const Vector& xhat_now, double t, double upsilon,
                                  const DesignGains& design) {
    if (!etm2_should_trigger(xhat_now, state, t, upsilon, design))
        throw ContractViolationError("controller event recorded at t = " + std::to_string(t) +
                                     " without the triggering condition");
    return ctrl_on_trigger(state, xhat_now, t, design);
}

}  // namespace etadrc
