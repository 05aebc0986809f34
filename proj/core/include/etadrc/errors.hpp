#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace etadrc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Lyapunov equation has no positive definite solution (non-Hurwitz input).
class NoSolutionError : public Error {
public:
    using Error::Error;
};

class NumericalFailureError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ContractViolationError : public Error {
public:
    using Error::Error;
};

// A sampled check of a declared modelling assumption (A1 / A2) failed.
class AssumptionViolationError : public Error {
public:
    AssumptionViolationError(std::string assumption, const std::string& what)
        : Error(assumption + ": " + what), assumption_(std::move(assumption)) {}

    const std::string& assumption() const noexcept { return assumption_; }

private:
    std::string assumption_;
};

class DivergenceError : public Error {
public:
    DivergenceError(double time, std::uint64_t stream_id, const std::string& what)
        : Error(what), time_(time), stream_id_(stream_id) {}

    double time() const noexcept { return time_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    double time_;
    std::uint64_t stream_id_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace etadrc
