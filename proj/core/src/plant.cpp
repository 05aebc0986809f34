#include "etadrc/plant.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "etadrc/errors.hpp"

namespace etadrc {
namespace {

struct DisturbanceEntry {
    DisturbanceFn f;
    std::function<double(double)> phi1;
    int min_order;
};

const std::map<std::string, DisturbanceEntry>& disturbances() {
    static const std::map<std::string, DisturbanceEntry> table = {
        {"paper-sec5",
         {[](double t, std::span<const double> x, double w1, double w2) {
              return x[0] + 2.0 * x[1] + std::sin(t) + std::cos(x[0] + x[1]) + w1 * w1 * w1 + w2;
          },
          [](double w1) { return std::abs(w1 * w1 * w1); }, 2}},
        {"linear-n2",
         {[](double, std::span<const double> x, double, double) { return x[0] + 2.0 * x[1]; },
          [](double) { return 0.0; }, 2}},
        {"zero", {[](double, std::span<const double>, double, double) { return 0.0; }, [](double) { return 0.0; }, 1}},
    };
    return table;
}

const std::map<std::string, CouplingFn>& couplings() {
    static const std::map<std::string, CouplingFn> table = {
        {"zero", [](std::span<const double>) { return 0.0; }},
        {"sin_sum",
         [](std::span<const double> xbar) { return std::sin(std::accumulate(xbar.begin(), xbar.end(), 0.0)); }},
    };
    return table;
}

}  // namespace

double SystemSpec::lipschitz_sum() const { return std::accumulate(lipschitz.begin(), lipschitz.end(), 0.0); }

std::vector<std::string> disturbance_catalog() {
    std::vector<std::string> names;
    for (const auto& [name, entry] : disturbances()) names.push_back(name);
    return names;
}

std::vector<std::string> coupling_catalog() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : couplings()) names.push_back(name);
    return names;
}

SystemSpec make_system(int n, const std::string& f_name, const std::vector<std::string>& g_names,
                       std::vector<double> lipschitz, std::array<double, 4> alphas) {
    if (n < 1) throw InvalidDimensionError("system order must be >= 1");
    if (static_cast<int>(g_names.size()) != n)
        throw InvalidDimensionError("expected " + std::to_string(n) + " coupling functions, got " +
                                    std::to_string(g_names.size()));
    if (static_cast<int>(lipschitz.size()) != n)
        throw InvalidDimensionError("expected " + std::to_string(n) + " Lipschitz constants, got " +
                                    std::to_string(lipschitz.size()));
    for (double l : lipschitz)
        if (!(l >= 0.0)) throw DomainError("Lipschitz constants must be >= 0");
    for (double a : alphas)
        if (!(a >= 0.0)) throw DomainError("growth constants alpha_1..alpha_4 must be >= 0");

    auto fit = disturbances().find(f_name);
    if (fit == disturbances().end()) throw ConfigError("unknown disturbance function '" + f_name + "'");
    if (n < fit->second.min_order)
        throw InvalidDimensionError("disturbance '" + f_name + "' needs order >= " +
                                    std::to_string(fit->second.min_order));

    SystemSpec spec;
    spec.n = n;
    spec.f = fit->second.f;
    spec.phi1 = fit->second.phi1;
    spec.f_name = f_name;
    spec.g_names = g_names;
    spec.lipschitz = std::move(lipschitz);
    spec.alphas = alphas;
    for (const auto& name : g_names) {
        auto git = couplings().find(name);
        if (git == couplings().end()) throw ConfigError("unknown coupling function '" + name + "'");
        spec.g.push_back(git->second);
    }

    check_couplings_vanish(spec);
    return spec;
}

void check_couplings_vanish(const SystemSpec& spec) {
    const std::vector<double> zeros(static_cast<std::size_t>(spec.n), 0.0);
    for (int i = 0; i < spec.n; ++i) {
        const double g0 = spec.g[static_cast<std::size_t>(i)](std::span<const double>(zeros.data(), i + 1));
        if (g0 != 0.0)
            throw AssumptionViolationError("A1", "g_" + std::to_string(i + 1) + "(0) = " + std::to_string(g0) +
                                                     ", must vanish at the origin");
    }
}

SystemSpec preset_system(const std::string& name) {
    if (name == "paper-sec5") {
        // |f| + |df/dt| <= (1 + sqrt 2) + sqrt 5 ||x|| + |w2| + |w1|^3
        return make_system(2, "paper-sec5", {"sin_sum", "sin_sum"}, {1.0, 1.0},
                           {1.0 + std::sqrt(2.0), std::sqrt(5.0), 1.0, 6.0});
    }
    if (name == "linear-n2") return make_system(2, "linear-n2", {"zero", "zero"}, {0.0, 0.0}, {0.0, std::sqrt(5.0), 0.0, 3.0});
    if (name == "silent") return make_system(2, "zero", {"zero", "zero"}, {0.0, 0.0}, {0.0, 0.0, 0.0, 0.0});
    throw ConfigError("unknown system preset '" + name + "'");
}

double sampled_lipschitz_ratio(const SystemSpec& spec, int pairs, double box, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-box, box);
    double worst = 0.0;
    std::vector<double> a(static_cast<std::size_t>(spec.n)), b(static_cast<std::size_t>(spec.n));
    for (int i = 0; i < spec.n; ++i) {
        const double li = spec.lipschitz[static_cast<std::size_t>(i)];
        for (int p = 0; p < pairs; ++p) {
            double dist2 = 0.0;
            for (int j = 0; j <= i; ++j) {
                a[static_cast<std::size_t>(j)] = dist(gen);
                b[static_cast<std::size_t>(j)] = dist(gen);
                const double d = a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)];
                dist2 += d * d;
            }
            const auto& gi = spec.g[static_cast<std::size_t>(i)];
            const double diff = std::abs(gi(std::span<const double>(a.data(), i + 1)) -
                                         gi(std::span<const double>(b.data(), i + 1)));
            if (diff == 0.0 || dist2 == 0.0) continue;
            const double ratio = li > 0.0 ? diff / (li * std::sqrt(dist2)) : INFINITY;
            worst = std::max(worst, ratio);
        }
    }
    return worst;
}

void plant_drift_into(const SystemSpec& spec, double t, const Vector& x, double u, double w1, double w2,
                      Vector& out) {
    const int n = spec.n;
    if (x.size() != n)
        throw InvalidDimensionError("state has dimension " + std::to_string(x.size()) + ", plant order is " +
                                    std::to_string(n));
    out.resize(n);
    const double* xs = x.data();
    for (int i = 0; i < n - 1; ++i)
        out[i] = xs[i + 1] + spec.g[static_cast<std::size_t>(i)](std::span<const double>(xs, i + 1));
    const std::span<const double> full(xs, static_cast<std::size_t>(n));
    out[n - 1] = spec.f(t, full, w1, w2) + spec.g[static_cast<std::size_t>(n - 1)](full) + u;
}

Vector plant_drift(const SystemSpec& spec, double t, const Vector& x, double u, double w1, double w2) {
    Vector out(spec.n);
    plant_drift_into(spec, t, x, u, w1, w2, out);
    return out;
}

double total_disturbance(const SystemSpec& spec, double t, const Vector& x, double w1, double w2) {
    if (x.size() != spec.n)
        throw InvalidDimensionError("state has dimension " + std::to_string(x.size()) + ", plant order is " +
                                    std::to_string(spec.n));
    return spec.f(t, std::span<const double>(x.data(), static_cast<std::size_t>(spec.n)), w1, w2);
}

}  // namespace etadrc
