#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

namespace etadrc {

/// Philox4x32-10 counter-based block cipher.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

enum class Substream : std::uint32_t { B1 = 0, B2 = 1 };

/// Standard normal stream addressed by (seed, stream_id, substream).
///
/// The seed is the cipher key; stream_id and substream occupy the upper
/// counter words, so every trajectory and each of its two Brownian drivers
/// read disjoint parts of one keyed sequence. Same triple, same numbers.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, Substream substream);

    double next_normal();
    double next_uniform();  // in (0, 1)

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    Substream substream() const noexcept { return substream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    Substream substream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;  // 32-bit words consumed from buffer_
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Normal(0, h) increment. Throws DomainError for h <= 0.
double brownian_increment(RngStream& stream, double h);

/// w1(t) = psi(t, B1(t)), with alpha5 the declared bound on |psi|.
struct BoundedNoiseSpec {
    std::string kind = "zero";  // catalog name: "sin_t_plus_b", "constant", "zero"
    double amplitude = 0.0;
    double alpha5 = 0.0;
    std::function<double(double t, double b)> psi;
};

BoundedNoiseSpec make_bounded_noise(const std::string& kind, double amplitude, double alpha5);

/// psi(t, B1). With check_bound set, |psi| > alpha5 raises an
/// AssumptionViolationError naming A2.
double bounded_noise(const BoundedNoiseSpec& spec, double t, double b1, bool check_bound = false);

/// Colored noise dw2 = -rho1 w2 dt + rho1 sqrt(2 rho2) dB2.
struct OuState {
    double w2 = 0.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
};

/// One Euler-Maruyama step. Throws DomainError for h <= 0 or rho <= 0.
OuState ou_step(const OuState& state, double h, double db2);

}  // namespace etadrc
