#include "etadrc/noise.hpp"

#include <cmath>
#include <numbers>

#include "etadrc/errors.hpp"

namespace etadrc {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, Substream substream)
    : seed_(seed), stream_id_(stream_id), substream_(substream) {
    if (stream_id >> 63) throw DomainError("stream_id must fit in 63 bits");
}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_id_),
        (static_cast<std::uint32_t>(stream_id_ >> 32) << 1) | static_cast<std::uint32_t>(substream_)};
    buffer_ = philox4x32_10(counter, {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    used_ = 0;
}

double RngStream::next_uniform() {
    if (used_ > 2) refill();
    const std::uint64_t bits = (static_cast<std::uint64_t>(buffer_[static_cast<std::size_t>(used_)]) << 32) |
                               buffer_[static_cast<std::size_t>(used_ + 1)];
    used_ += 2;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double brownian_increment(RngStream& stream, double h) {
    if (!(h > 0.0)) throw DomainError("Brownian increment needs h > 0");
    return std::sqrt(h) * stream.next_normal();
}

BoundedNoiseSpec make_bounded_noise(const std::string& kind, double amplitude, double alpha5) {
    if (!(alpha5 >= 0.0)) throw DomainError("alpha5 must be >= 0");
    BoundedNoiseSpec spec{kind, amplitude, alpha5, {}};
    if (kind == "sin_t_plus_b")
        spec.psi = [amplitude](double t, double b) { return amplitude * std::sin(t + b); };
    else if (kind == "constant")
        spec.psi = [amplitude](double, double) { return amplitude; };
    else if (kind == "zero")
        spec.psi = [](double, double) { return 0.0; };
    else
        throw ConfigError("unknown bounded noise kind '" + kind + "'");
    return spec;
}

double bounded_noise(const BoundedNoiseSpec& spec, double t, double b1, bool check_bound) {
    const double w1 = spec.psi ? spec.psi(t, b1) : 0.0;
    if (check_bound && std::abs(w1) > spec.alpha5)
        throw AssumptionViolationError("A2", "|psi(" + std::to_string(t) + ", " + std::to_string(b1) +
                                                 ")| = " + std::to_string(std::abs(w1)) + " exceeds alpha5 = " +
                                                 std::to_string(spec.alpha5));
    return w1;
}

OuState ou_step(const OuState& state, double h, double db2) {
    if (!(h > 0.0)) throw DomainError("OU step needs h > 0");
    if (!(state.rho1 > 0.0) || !(state.rho2 > 0.0)) throw DomainError("OU parameters rho1, rho2 must be > 0");
    OuState next = state;
    next.w2 = state.w2 - state.rho1 * state.w2 * h + state.rho1 * std::sqrt(2.0 * state.rho2) * db2;
    return next;
}

}  // namespace etadrc
