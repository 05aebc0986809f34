#include "etadrc/observer.hpp"

#include <cmath>

#include "etadrc/errors.hpp"

namespace etadrc {

std::vector<double> gain_powers(double r, int n) {
    std::vector<double> out(static_cast<std::size_t>(n) + 2, 1.0);
    for (std::size_t i = 1; i < out.size(); ++i) out[i] = out[i - 1] * r;
    return out;
}

void eso_drift_into(const EsoState& state, double u, const DesignGains& design, const SystemSpec& spec,
                    std::span<const double> r_powers, Vector& out) {
    const int n = spec.n;
    if (state.xhat.size() != n + 1)
        throw InvalidDimensionError("observer state has dimension " + std::to_string(state.xhat.size()) +
                                    ", expected " + std::to_string(n + 1));
    if (design.order() != n || static_cast<int>(r_powers.size()) < n + 2)
        throw InvalidDimensionError("design order does not match plant order");
    out.resize(n + 1);
    const double* xh = state.xhat.data();
    const double innovation = state.y_held - xh[0];
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out[i] = xh[i + 1] + design.lambdas[idx] * r_powers[idx + 1] * innovation +
                 spec.g[idx](std::span<const double>(xh, idx + 1));
    }
    out[n - 1] += u;
    out[n] = design.lambdas[static_cast<std::size_t>(n)] * r_powers[static_cast<std::size_t>(n) + 1] * innovation;
}

Vector eso_drift(const EsoState& state, double u, const DesignGains& design, const SystemSpec& spec) {
    Vector out(spec.n + 1);
    const auto powers = gain_powers(design.r, spec.n);
    eso_drift_into(state, u, design, spec, powers, out);
    return out;
}

double etm1_threshold(const DesignGains& design, int n) {
    return design.kappa1 * std::pow(design.r, -(static_cast<double>(n) + 0.5));
}

bool etm1_should_trigger(double y_now, const EsoState& state, double t, double tau, const DesignGains& design, int n) {
    return t - state.t_last >= tau && std::abs(y_now - state.y_held) >= etm1_threshold(design, n);
}

EsoState eso_on_trigger(const EsoState& state, double y_now, double t) {
    EsoState next = state;
    next.y_held = y_now;
    next.t_last = t;
    ++next.k;
    return next;
}

EsoState eso_on_trigger_checked(const EsoState& state, double y_now, double t, double tau, const DesignGains& design,
                                int n) {
    if (!etm1_should_trigger(y_now, state, t, tau, design, n))
        throw ContractViolationError("sensor event recorded at t = " + std::to_string(t) +
                                     " without the triggering condition");
    return eso_on_trigger(state, y_now, t);
}

}  // namespace etadrc
