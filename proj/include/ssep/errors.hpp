#pragma once

#include <stdexcept>
#include <string>

namespace ssep {

// Invalid model or numerical parameters (density out of range, ring too small, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A record lacks the data an observable needs (missing snapshot, current window too short).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact state space larger than the configured cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated computation lost more mass than allowed.
struct AccuracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad experiment configuration: unknown key, wrong type, value out of range.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver hit its cap; `residual` is the last relative gradient norm.
struct SolverError : std::runtime_error {
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

}  // namespace ssep
