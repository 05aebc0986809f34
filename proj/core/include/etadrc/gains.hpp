#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "etadrc/plant.hpp"

namespace etadrc {

enum class CompanionKind {
    Observer,    // H: first column -lambda_i, ones on the superdiagonal
    Controller,  // J: ones on the superdiagonal, last row c_1..c_n
};

/// Structured companion matrix. Entries outside the pattern are exactly zero.
class CompanionMatrix {
public:
    CompanionMatrix(CompanionKind kind, std::vector<double> gains);

    CompanionKind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return static_cast<int>(entries_.rows()); }
    const Matrix& matrix() const noexcept { return entries_; }
    const std::vector<double>& gains() const noexcept { return gains_; }

    /// Monic characteristic polynomial det(sI - A), highest power first.
    std::vector<double> characteristic_polynomial() const;

    /// Eigenvalues with clusters of repeated roots refined (see polish_roots).
    std::vector<std::complex<double>> eigenvalues() const;

private:
    CompanionKind kind_;
    std::vector<double> gains_;
    Matrix entries_;
};

CompanionMatrix build_H(std::span<const double> lambdas);
CompanionMatrix build_J(std::span<const double> cs);

/// Refines raw eigenvalue estimates of the monic polynomial `coeffs`.
/// Repeated roots come out of a QR eigensolver scattered on a circle of
/// radius ~eps^(1/m); the cluster mean is well conditioned and a Newton
/// step on the (m-1)-th derivative pins the multiple root to full precision.
std::vector<std::complex<double>> polish_roots(const std::vector<double>& coeffs,
                                               std::vector<std::complex<double>> raw);

inline constexpr double kHurwitzMargin = 1e-9;

/// True iff every eigenvalue has real part < -kHurwitzMargin.
bool is_hurwitz(const Matrix& a);
bool is_hurwitz(const CompanionMatrix& a);

struct LyapunovSolution {
    Matrix q;
    double residual_norm = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

inline constexpr double kLyapunovResidualTolerance = 1e-10;

/// Solves Q A + A^T Q = -I through the vectorised (Kronecker) system.
/// Throws NoSolutionError for non-Hurwitz A and NumericalFailureError when
/// the residual exceeds kLyapunovResidualTolerance.
LyapunovSolution solve_lyapunov(const Matrix& a);

/// Observer gains lambda_1..lambda_{n+1}, tuning gain r, controller gains
/// c_1..c_n with scaling theta, and the two triggering rules' parameters.
struct DesignGains {
    std::vector<double> lambdas;
    std::vector<double> cs;
    double r = 1.0;
    double theta = 1.0;
    double eps1 = 1.0;
    double kappa1 = 1.0;
    double eps2 = 1.0;
    double kappa2 = 1.0;

    int order() const noexcept { return static_cast<int>(cs.size()); }

    /// max_{1<=i<=n+1} |c_i| with c_{n+1} = 1.
    double max_abs_c() const;

    /// Throws DomainError / InvalidDimensionError on a malformed design.
    void check() const;
};

struct DwellTimes {
    double tau = 0.0;      // sensor side: eps1 r^-(2n+3/2)
    double upsilon = 0.0;  // controller side: eps2 r^-(2n/3+1)
};

DwellTimes dwell_times(double r, int n, double eps1, double eps2);
DwellTimes dwell_times(const DesignGains& design);

struct DesignCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<DesignCheck> checks;
    double q1_lambda_max = 0.0;
    double theta_threshold = 0.0;
    double dwell_product = 0.0;

    bool all_passed() const;
    const DesignCheck& check(const std::string& name) const;
};

/// Checks Hurwitz H and J, theta > 2 lambda_max(Q1) sum L_i, and
/// upsilon theta^n max|c_i| < 1. Failures are reported, never thrown.
ValidationReport validate_design(const DesignGains& design, const SystemSpec& spec);
ValidationReport validate_design(const DesignGains& design, const SystemSpec& spec, double upsilon);

/// Sup-bounds of E|w2|^2 and phi_1(w1)^2 feeding the noise term of Lambda_6.
struct NoiseMoments {
    double w2_second_moment_sup = 0.0;
    double phi1_squared_sup = 0.0;
};

/// Colored noise started at w2(0) has E w2^2 between w2(0)^2 and rho1 rho2;
/// phi_1 is maximised over |w1| <= alpha5 on a fine grid.
NoiseMoments default_noise_moments(const SystemSpec& spec, double rho1, double rho2, double w2_initial,
                                   double alpha5);

struct LambdaCoefficients {
    std::array<double, 6> values{};  // Lambda_1 .. Lambda_6
    double lambda6_kappa_term = 0.0; // the kappa_1 part of Lambda_6

    double operator[](int i) const { return values[static_cast<std::size_t>(i - 1)]; }
};

/// Closed-form bounds on the controller-side sampling error. Requires
/// upsilon theta^n max|c_i| < 1 (PreconditionError otherwise).
LambdaCoefficients lambda_coefficients(double upsilon, double tau, double r, const DesignGains& design,
                                       const SystemSpec& spec, const NoiseMoments& moments);

struct CertificationOptions {
    double r0 = 1.0;
    double cap = 1152921504606846976.0;  // 2^60
};

struct CertificationReport {
    bool certified = false;
    std::vector<std::string> flags;  // names of the conditions that failed
    double gamma1_limit = 0.0;       // gamma_1 with vanishing dwell times
    double gamma1 = 0.0;             // at r1
    double gamma2 = 0.0;
    double gamma_star = 0.0;
    std::array<double, 5> gamma3_to_7{};  // at r2
    double r1 = 0.0;
    double r2 = 0.0;
    double r_star = 0.0;
};

/// Evaluates the gain-threshold inequalities for user-supplied beta_1..5
/// and mu_1..4, locating r1 and r2 on the grid r0 * 2^k up to `cap`.
CertificationReport certify_r_star(const DesignGains& design, const SystemSpec& spec,
                                   const std::array<double, 5>& betas, const std::array<double, 4>& mus,
                                   const CertificationOptions& options = {});

}  // namespace etadrc
