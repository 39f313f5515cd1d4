#pragma once

#include <stdexcept>
#include <string>

namespace sqzbath {

// Invalid input shapes or parameter values.
struct InvalidDimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Closed-form machinery.
struct DegenerateParameters : std::domain_error {
    using std::domain_error::domain_error;
};
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};
struct NoSolution : std::domain_error {
    using std::domain_error::domain_error;
};

// Numerical failures raised by the engine and the fits.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrationFailure : NumericalError {
    using NumericalError::NumericalError;
};
struct ConvergenceError : NumericalError {
    using NumericalError::NumericalError;
};
struct InstabilityError : NumericalError {
    using NumericalError::NumericalError;
};
struct Unfittable : NumericalError {
    using NumericalError::NumericalError;
};
struct NumericalDegeneracy : NumericalError {
    using NumericalError::NumericalError;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sqzbath
