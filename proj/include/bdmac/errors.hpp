#pragma once

#include <stdexcept>
#include <string>

namespace bdmac {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration document or scenario invariant violation.
struct ConfigError : Error {
    using Error::Error;
};

// Argument outside an operation's stated domain.
struct DomainError : Error {
    using Error::Error;
};

// A transmission-probability denominator vanished (p_b = 1, p_a = 0, ...).
struct SingularityError : Error {
    using Error::Error;
};

// Fixed point did not reach tolerance within the iteration budget.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double residual_, long iterations_)
        : Error(msg), residual(residual_), iterations(iterations_) {}
    double residual = 0.0;
    long iterations = 0;
};

// An iterate or state left its admissible range.
struct DivergenceError : Error {
    using Error::Error;
};

// Numerical contract violated (negative variance, lost mass, ...).
struct NumericError : Error {
    using Error::Error;
};

}  // namespace bdmac
