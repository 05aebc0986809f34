#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace etadrc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// f(t, x, w1, w2): the unknown part of the last channel; it is also the
// extended state x_{n+1} the observer tracks.
using DisturbanceFn = std::function<double(double t, std::span<const double> x, double w1, double w2)>;

// g_i(x_1..x_i): known lower-triangular coupling of channel i.
using CouplingFn = std::function<double(std::span<const double> xbar)>;

/// Lower-triangular plant
///
///   dx_i = (x_{i+1} + g_i(x_1..x_i)) dt,             i < n
///   dx_n = (f(t, x, w1, w2) + g_n(x) + u) dt,
///   y    = x_1
///
/// together with the growth-bound metadata the gain analysis consumes.
/// Immutable after construction; evaluation is safe from any thread.
struct SystemSpec {
    int n = 0;
    DisturbanceFn f;
    std::vector<CouplingFn> g;
    std::vector<double> lipschitz;       // L_1..L_n
    std::array<double, 4> alphas{};      // alpha_1..alpha_4 growth constants
    std::function<double(double)> phi1;  // growth of f in w1; |w1| when unset

    // Catalog names, kept for config round-trips.
    std::string f_name;
    std::vector<std::string> g_names;

    double lipschitz_sum() const;
};

/// Assembles a SystemSpec from catalog names and checks g_i(0) = 0.
/// Throws ConfigError for unknown names, InvalidDimensionError for length
/// mismatches and AssumptionViolationError when some g_i(0) != 0.
SystemSpec make_system(int n, const std::string& f_name, const std::vector<std::string>& g_names,
                       std::vector<double> lipschitz, std::array<double, 4> alphas);

/// Throws AssumptionViolationError("A1") when some g_i(0) != 0.
void check_couplings_vanish(const SystemSpec& spec);

/// Built-in plants: "paper-sec5", "linear-n2", "silent".
SystemSpec preset_system(const std::string& name);

std::vector<std::string> disturbance_catalog();
std::vector<std::string> coupling_catalog();

/// Sampled Lipschitz smoke check over random pairs in [-box, box]^i.
/// Returns the largest observed ratio |g_i(a)-g_i(b)| / (L_i ||a-b||) across
/// all channels; values above 1 mean a declared L_i is too small.
double sampled_lipschitz_ratio(const SystemSpec& spec, int pairs, double box, std::uint64_t seed);

/// Drift of the plant state (right-hand side above).
Vector plant_drift(const SystemSpec& spec, double t, const Vector& x, double u, double w1, double w2);
void plant_drift_into(const SystemSpec& spec, double t, const Vector& x, double u, double w1, double w2,
                      Vector& out);

/// True extended state x_{n+1}(t) = f(t, x, w1, w2).
double total_disturbance(const SystemSpec& spec, double t, const Vector& x, double w1, double w2);

}  // namespace etadrc
