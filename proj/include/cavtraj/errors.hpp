#pragma once

#include <stdexcept>
#include <string>

namespace cavtraj {

/// Malformed or physically invalid run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Blow-up, NaN/Inf, or other failure of a numerical integration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver ran out of iterations or started oscillating.
class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace cavtraj
