#include "etadrc/gains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "etadrc/errors.hpp"

namespace etadrc {
namespace {

using Complex = std::complex<double>;

std::vector<double> derivative(const std::vector<double>& coeffs) {
    const std::size_t degree = coeffs.size() - 1;
    std::vector<double> out;
    if (degree == 0) return {0.0};
    out.reserve(degree);
    for (std::size_t i = 0; i < degree; ++i) out.push_back(coeffs[i] * static_cast<double>(degree - i));
    return out;
}

Complex horner(const std::vector<double>& coeffs, Complex z) {
    Complex acc = 0.0;
    for (double c : coeffs) acc = acc * z + c;
    return acc;
}

std::vector<Complex> raw_eigenvalues(const Matrix& a) {
    Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalFailureError("eigenvalue iteration did not converge");
    std::vector<Complex> out;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()[i]);
    return out;
}

double pow_int(double base, int exponent) {
    double out = 1.0;
    for (int i = 0; i < exponent; ++i) out *= base;
    return out;
}

}  // namespace

CompanionMatrix::CompanionMatrix(CompanionKind kind, std::vector<double> gains)
    : kind_(kind), gains_(std::move(gains)) {
    const auto m = static_cast<Eigen::Index>(gains_.size());
    entries_ = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) entries_(i, i + 1) = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (kind_ == CompanionKind::Observer)
            entries_(i, 0) = -gains_[static_cast<std::size_t>(i)];
        else
            entries_(m - 1, i) = gains_[static_cast<std::size_t>(i)];
    }
}

std::vector<double> CompanionMatrix::characteristic_polynomial() const {
    const std::size_t m = gains_.size();
    std::vector<double> coeffs(m + 1, 0.0);
    coeffs[0] = 1.0;
    if (kind_ == CompanionKind::Observer) {
        // s^{m} + lambda_1 s^{m-1} + ... + lambda_m
        for (std::size_t i = 0; i < m; ++i) coeffs[i + 1] = gains_[i];
    } else {
        // s^m - c_m s^{m-1} - ... - c_1
        for (std::size_t i = 0; i < m; ++i) coeffs[i + 1] = -gains_[m - 1 - i];
    }
    return coeffs;
}

std::vector<Complex> CompanionMatrix::eigenvalues() const {
    return polish_roots(characteristic_polynomial(), raw_eigenvalues(entries_));
}

namespace {

// A root of multiplicity m moves by about eps^{1/m} under rounding; the
// radius allows for the worst case m = degree.
double cluster_radius(std::size_t degree, Complex z) {
    const double spread = 10.0 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / static_cast<double>(degree));
    return std::max(1e-3, spread) * std::max(1.0, std::abs(z));
}

}  // namespace

std::vector<Complex> polish_roots(const std::vector<double>& coeffs, std::vector<Complex> raw) {
    const std::size_t count = raw.size();
    std::vector<std::size_t> parent(count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = i + 1; j < count; ++j)
            if (std::abs(raw[i] - raw[j]) <= cluster_radius(count, raw[i])) parent[find(i)] = find(j);

    std::vector<Complex> out(count);
    std::vector<bool> done(count, false);
    for (std::size_t i = 0; i < count; ++i) {
        if (done[i]) continue;
        const std::size_t root = find(i);
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < count; ++j)
            if (find(j) == root) members.push_back(j);

        Complex centre = 0.0;
        for (auto j : members) centre += raw[j];
        centre /= static_cast<double>(members.size());

        // The cluster's multiple root is a simple root of p^{(m-1)}.
        std::vector<double> target = coeffs;
        for (std::size_t d = 1; d < members.size(); ++d) target = derivative(target);
        const std::vector<double> slope = derivative(target);

        Complex z = centre;
        for (int iter = 0; iter < 50; ++iter) {
            const Complex ds = horner(slope, z);
            if (ds == 0.0) break;
            const Complex step = horner(target, z) / ds;
            z -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
        }
        // Keep the refined value only if it stays in the cluster and is at
        // least as good a root of p as every raw member; otherwise the
        // cluster was a set of distinct close roots and the raw values stand.
        double worst_raw = 0.0;
        for (auto j : members) worst_raw = std::max(worst_raw, std::abs(horner(coeffs, raw[j])));
        const bool accept = members.size() > 1 && std::isfinite(z.real()) && std::isfinite(z.imag()) &&
                            std::abs(z - centre) <= cluster_radius(count, centre) &&
                            std::abs(horner(coeffs, z)) <= worst_raw;
        for (auto j : members) {
            out[j] = accept ? z : (members.size() > 1 ? raw[j] : z);
            done[j] = true;
        }
    }
    return out;
}

CompanionMatrix build_H(std::span<const double> lambdas) {
    if (lambdas.size() < 2) throw InvalidDimensionError("observer gain vector needs length >= 2");
    return CompanionMatrix(CompanionKind::Observer, std::vector<double>(lambdas.begin(), lambdas.end()));
}

CompanionMatrix build_J(std::span<const double> cs) {
    if (cs.empty()) throw InvalidDimensionError("controller gain vector needs length >= 1");
    return CompanionMatrix(CompanionKind::Controller, std::vector<double>(cs.begin(), cs.end()));
}

bool is_hurwitz(const Matrix& a) {
    if (a.rows() != a.cols()) throw InvalidDimensionError("Hurwitz test needs a square matrix");
    if (a.size() == 0) throw InvalidDimensionError("Hurwitz test needs a non-empty matrix");
    const auto eig = raw_eigenvalues(a);
    return std::all_of(eig.begin(), eig.end(), [](Complex z) { return z.real() < -kHurwitzMargin; });
}

bool is_hurwitz(const CompanionMatrix& a) {
    const auto eig = a.eigenvalues();
    return std::all_of(eig.begin(), eig.end(), [](Complex z) { return z.real() < -kHurwitzMargin; });
}

LyapunovSolution solve_lyapunov(const Matrix& a) {
    if (!is_hurwitz(a)) throw NoSolutionError("Lyapunov equation QA + A^T Q = -I needs a Hurwitz A");
    const Eigen::Index m = a.rows();
    const Matrix at = a.transpose();

    // Column-major vec: vec(A^T Q) = (I kron A^T) vec Q, vec(Q A) = (A^T kron I) vec Q.
    Matrix k = Matrix::Zero(m * m, m * m);
    for (Eigen::Index col = 0; col < m; ++col)
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) {
                k(col * m + i, col * m + j) += at(i, j);
                k(col * m + i, j * m + i) += at(col, j);
            }
    Vector rhs = Vector::Zero(m * m);
    for (Eigen::Index i = 0; i < m; ++i) rhs(i * m + i) = -1.0;

    const auto lu = k.fullPivLu();
    Vector vec_q = lu.solve(rhs);
    Matrix q;
    LyapunovSolution out;
    // A few rounds of iterative refinement for ill-conditioned companions.
    for (int round = 0; round < 4; ++round) {
        q = Eigen::Map<const Matrix>(vec_q.data(), m, m);
        q = 0.5 * (q + q.transpose()).eval();
        out.residual_norm = (q * a + at * q + Matrix::Identity(m, m)).norm();
        if (out.residual_norm <= 0.01 * kLyapunovResidualTolerance) break;
        vec_q = Eigen::Map<const Vector>(q.data(), m * m);
        vec_q += lu.solve(rhs - k * vec_q);
    }
    if (!(out.residual_norm <= kLyapunovResidualTolerance))
        throw NumericalFailureError("Lyapunov residual " + std::to_string(out.residual_norm) + " exceeds tolerance");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
    out.lambda_min = eig.eigenvalues().minCoeff();
    out.lambda_max = eig.eigenvalues().maxCoeff();
    if (!(out.lambda_min > 0.0)) throw NumericalFailureError("Lyapunov solution is not positive definite");
    out.q = std::move(q);
    return out;
}

double DesignGains::max_abs_c() const {
    double out = 1.0;
    for (double c : cs) out = std::max(out, std::abs(c));
    return out;
}

void DesignGains::check() const {
    if (cs.empty()) throw InvalidDimensionError("controller gains must be non-empty");
    if (lambdas.size() != cs.size() + 1)
        throw InvalidDimensionError("need n+1 = " + std::to_string(cs.size() + 1) + " observer gains, got " +
                                    std::to_string(lambdas.size()));
    if (!(r > 0.0)) throw DomainError("tuning gain r must be > 0");
    if (!(theta >= 1.0)) throw DomainError("theta must be >= 1");
    if (!(eps1 > 0.0 && kappa1 > 0.0 && eps2 > 0.0 && kappa2 > 0.0))
        throw DomainError("triggering parameters eps1, kappa1, eps2, kappa2 must be > 0");
}

DwellTimes dwell_times(double r, int n, double eps1, double eps2) {
    if (!(r > 0.0)) throw DomainError("dwell times need r > 0");
    if (n < 1) throw DomainError("dwell times need n >= 1");
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw DomainError("dwell times need eps1, eps2 > 0");
    const double nn = static_cast<double>(n);
    return {eps1 * std::pow(r, -(2.0 * nn + 1.5)), eps2 * std::pow(r, -(2.0 * nn / 3.0 + 1.0))};
}

DwellTimes dwell_times(const DesignGains& design) {
    return dwell_times(design.r, design.order(), design.eps1, design.eps2);
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const DesignCheck& c) { return c.passed; });
}

const DesignCheck& ValidationReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no design check named " + name);
}

ValidationReport validate_design(const DesignGains& design, const SystemSpec& spec) {
    design.check();
    return validate_design(design, spec, dwell_times(design).upsilon);
}

ValidationReport validate_design(const DesignGains& design, const SystemSpec& spec, double upsilon) {
    design.check();
    if (design.order() != spec.n)
        throw InvalidDimensionError("design order " + std::to_string(design.order()) + " does not match plant order " +
                                    std::to_string(spec.n));
    ValidationReport report;

    const auto h = build_H(design.lambdas);
    const auto j = build_J(design.cs);
    const bool h_ok = is_hurwitz(h);
    const bool j_ok = is_hurwitz(j);

    auto spectral_abscissa = [](const CompanionMatrix& m) {
        double worst = -INFINITY;
        for (auto z : m.eigenvalues()) worst = std::max(worst, z.real());
        return worst;
    };
    report.checks.push_back({"H_hurwitz", h_ok, spectral_abscissa(h), -kHurwitzMargin,
                             "max real part of eig(H) must be < threshold"});
    report.checks.push_back({"J_hurwitz", j_ok, spectral_abscissa(j), -kHurwitzMargin,
                             "max real part of eig(J) must be < threshold"});

    DesignCheck theta_check{"theta_condition", false, design.theta, INFINITY,
                            "theta must exceed 2 lambda_max(Q1) sum L_i"};
    if (j_ok) {
        report.q1_lambda_max = solve_lyapunov(j.matrix()).lambda_max;
        report.theta_threshold = 2.0 * report.q1_lambda_max * spec.lipschitz_sum();
        theta_check.threshold = report.theta_threshold;
        theta_check.passed = design.theta > report.theta_threshold;
    } else {
        report.q1_lambda_max = NAN;
        report.theta_threshold = NAN;
        theta_check.threshold = NAN;
        theta_check.detail += " (Q1 undefined: J is not Hurwitz)";
    }
    report.checks.push_back(theta_check);

    report.dwell_product = upsilon * pow_int(design.theta, design.order()) * design.max_abs_c();
    report.checks.push_back({"dwell_product", report.dwell_product < 1.0, report.dwell_product, 1.0,
                             "upsilon theta^n max|c_i| must be < 1"});
    return report;
}

NoiseMoments default_noise_moments(const SystemSpec& spec, double rho1, double rho2, double w2_initial,
                                   double alpha5) {
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw DomainError("rho1, rho2 must be > 0");
    if (!(alpha5 >= 0.0)) throw DomainError("alpha5 must be >= 0");
    NoiseMoments out;
    out.w2_second_moment_sup = std::max(w2_initial * w2_initial, rho1 * rho2);
    const auto phi1 = spec.phi1 ? spec.phi1 : [](double w) { return std::abs(w); };
    constexpr int kGrid = 10000;
    double sup = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double w = -alpha5 + 2.0 * alpha5 * static_cast<double>(i) / kGrid;
        sup = std::max(sup, std::abs(phi1(w)));
    }
    out.phi1_squared_sup = sup * sup;
    return out;
}

LambdaCoefficients lambda_coefficients(double upsilon, double tau, double r, const DesignGains& design,
                                       const SystemSpec& spec, const NoiseMoments& moments) {
    design.check();
    if (!(upsilon >= 0.0) || !(tau >= 0.0) || !(r > 0.0)) throw DomainError("need upsilon, tau >= 0 and r > 0");
    if (design.order() != spec.n) throw InvalidDimensionError("design order does not match plant order");

    const int n = spec.n;
    const double nn = static_cast<double>(n);
    const double theta_n = pow_int(design.theta, n);
    const double theta_2n = theta_n * theta_n;
    const double cmax = design.max_abs_c();
    const double cmax2 = cmax * cmax;
    const double margin = 1.0 - upsilon * theta_n * cmax;
    if (!(margin > 0.0))
        throw PreconditionError("upsilon theta^n max|c_i| = " + std::to_string(1.0 - margin) + " must be < 1");
    const double denom = margin * margin;

    double lambda_sq = 0.0;
    for (double l : design.lambdas) lambda_sq += l * l;
    double l_sq = 0.0;
    double l_sq_scaled = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double li = spec.lipschitz[static_cast<std::size_t>(i - 1)];
        l_sq += li * li;
        l_sq_scaled += li * li / pow_int(r, 2 * (n + 1 - i));
    }
    const double a1 = spec.alphas[0], a2 = spec.alphas[1], a3 = spec.alphas[2];
    const double l1 = spec.lipschitz[0];
    const double u2 = upsilon * upsilon;

    LambdaCoefficients out;
    auto& v = out.values;
    v[0] = 10.0 * (nn + 1.0) * theta_2n * (cmax2 + 4.0 * a2 * a2) * u2 / denom;
    v[1] = 10.0 * (nn * (1.0 + l_sq) + 4.0 * nn * a2 * a2) * upsilon / denom;
    v[2] = 10.0 * (nn + 1.0) * (1.0 + l1 * l1) * u2 * (upsilon + tau) * pow_int(r, 2 * (n + 1)) * lambda_sq / denom;
    v[3] = 10.0 * (nn + 1.0) * theta_2n * cmax2 * u2 / denom;
    v[4] = 10.0 * (nn * (1.0 + l_sq_scaled) + (nn + 1.0) * r * r * lambda_sq) * upsilon / denom;

    const double prefactor = 10.0 * theta_2n * u2 / denom;
    const double noise_term =
        (4.0 + 8.0 * nn) * (a1 * a1 + a3 * a3 * moments.w2_second_moment_sup + moments.phi1_squared_sup);
    const double kappa_term = r * (nn + 1.0) * design.kappa1 * design.kappa1 * lambda_sq;
    v[5] = prefactor * (noise_term + kappa_term);
    out.lambda6_kappa_term = prefactor * kappa_term;
    return out;
}

CertificationReport certify_r_star(const DesignGains& design, const SystemSpec& spec,
                                   const std::array<double, 5>& betas, const std::array<double, 4>& mus,
                                   const CertificationOptions& options) {
    for (double b : betas)
        if (!(b > 0.0)) throw DomainError("beta_1..beta_5 must be > 0");
    for (double m : mus)
        if (!(m > 0.0)) throw DomainError("mu_1..mu_4 must be > 0");
    if (!(options.r0 > 0.0) || !(options.cap >= options.r0)) throw DomainError("grid needs 0 < r0 <= cap");

    CertificationReport report;
    const auto validation = validate_design(design, spec);
    if (!validation.check("H_hurwitz").passed || !validation.check("J_hurwitz").passed) {
        report.flags.push_back("hurwitz");
        return report;
    }
    if (!validation.all_passed()) report.flags.push_back("design");

    const int n = spec.n;
    const double q1 = solve_lyapunov(build_J(design.cs).matrix()).lambda_max;
    const double q2 = solve_lyapunov(build_H(design.lambdas).matrix()).lambda_max;
    const double sum_l = spec.lipschitz_sum();
    const auto [mu1, mu2, mu3, mu4] = mus;

    report.gamma1_limit = design.theta - 2.0 * q1 * sum_l - mu1 * q1 * q1 - mu2 * q1 * q1 - mu4 * q2 * q2 * betas[1];
    double abs_lambda_sum = 0.0;
    for (double l : design.lambdas) abs_lambda_sum += std::abs(l);
    report.gamma2 = 1.0 - mu3 * q2 * q2 * abs_lambda_sum * abs_lambda_sum;
    if (!(report.gamma1_limit > 0.0)) report.flags.push_back("gamma1");
    if (!(report.gamma2 > 0.0)) report.flags.push_back("gamma2");
    if (!report.flags.empty()) return report;

    double weighted_c = 0.0;  // sum_{i<=n+1} theta^{n+1-i} c_i, c_{n+1} = 1
    for (int i = 1; i <= n; ++i) weighted_c += pow_int(design.theta, n + 1 - i) * design.cs[static_cast<std::size_t>(i - 1)];
    weighted_c += 1.0;

    auto gamma1_at = [&](double r) {
        const auto d = dwell_times(r, n, design.eps1, design.eps2);
        return report.gamma1_limit - 2.0 * d.upsilon - 2.0 * d.tau;
    };
    auto r1_condition = [&](double r) {
        const auto d = dwell_times(r, n, design.eps1, design.eps2);
        return report.gamma2 * r / 2.0 - weighted_c * weighted_c / mu1 - 2.0 * q2 * sum_l - mu4 * q2 * q2 * betas[2] -
               1.0 / mu4 - d.upsilon;
    };

    std::vector<double> grid;
    for (double r = options.r0; r <= options.cap; r *= 2.0) grid.push_back(r);

    auto r1_it = std::find_if(grid.begin(), grid.end(), [&](double r) { return gamma1_at(r) > 0.0 && r1_condition(r) > 0.0; });
    if (r1_it == grid.end()) {
        report.flags.push_back("r1");
        return report;
    }
    report.r1 = *r1_it;
    report.gamma1 = gamma1_at(report.r1);

    const double cmax = design.max_abs_c();
    report.gamma_star = pow_int(design.theta, 2 * n) / mu2 * cmax * cmax + mu4 * q2 * q2 * betas[3];

    const NoiseMoments no_noise{};
    LambdaCoefficients at_r2;
    auto r2_it = std::find_if(grid.begin(), grid.end(), [&](double r) {
        const auto d = dwell_times(r, n, design.eps1, design.eps2);
        if (!(d.upsilon * pow_int(design.theta, n) * cmax < 1.0)) return false;
        const auto lam = lambda_coefficients(d.upsilon, d.tau, r, design, spec, no_noise);
        const std::array<double, 5> g = {
            report.gamma1 - report.gamma_star * lam[1], 1.0 - report.gamma_star * lam[2],
            1.0 - design.eps1 / (mu3 * std::sqrt(r)), 1.0 - report.gamma_star * lam[3],
            1.0 - report.gamma_star * lam[5]};
        if (!std::all_of(g.begin(), g.end(), [](double x) { return x > 0.0; })) return false;
        report.gamma3_to_7 = g;
        at_r2 = lam;
        return true;
    });
    if (r2_it == grid.end()) {
        report.flags.push_back("r2");
        return report;
    }
    report.r2 = *r2_it;

    report.r_star = std::max({4.0 * report.gamma_star / report.gamma2 * at_r2[4], design.eps1 * design.eps1 / (mu3 * mu3),
                              report.r1, report.r2});
    report.certified = report.flags.empty();
    return report;
}

}  // namespace etadrc
