#pragma once

#include <stdexcept>
#include <string>

namespace fkmatch {

// Error categories used throughout the library. The C API maps each type
// onto a status code, so new errors should derive from one of these.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

// Out-of-domain input: state outside a family's state space, time outside
// the declared time domain, role violation of a time function.
struct DomainError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(std::string msg, std::size_t position)
        : Error(msg + " (at position " + std::to_string(position) + ")"),
          pos(position) {}
    std::size_t pos;
};

// Numerical failure: quadrature non-convergence, ODE blow-up, singular
// denominators. Carries the best estimate when one exists.
struct NumericalError : Error {
    explicit NumericalError(const std::string& msg, double best = 0.0)
        : Error(msg), best_estimate(best) {}
    double best_estimate;
};

struct OdeBlowUp : NumericalError {
    OdeBlowUp(const std::string& msg, double t, double y)
        : NumericalError(msg, y), t_last(t), y_last(y) {}
    double t_last;
    double y_last;
};

struct NotInvertible : NumericalError {
    using NumericalError::NumericalError;
};

struct BudgetExceeded : Error {
    using Error::Error;
};

}  // namespace fkmatch
