#pragma once

#include <stdexcept>
#include <string>

namespace steplab {

/// Bad argument at an API boundary (precondition violated).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value produced or consumed by an arithmetic step.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ray requested along a zero direction.
class DegenerateDirection : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// The first gradient of a D-Adapted run is zero, so no step size exists.
class ZeroGradientStart : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A weighted gradient sum is too small to divide by.
class DegenerateSum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// AdaGrad-Norm asked for a step with nothing accumulated.
class DivisionGuard : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Line search initialised with a non-negative slope.
class NotDescentDirection : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Gram matrix failed to factorize after the noise floor.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Correlation outside [-1, 1] beyond rounding slack.
class InvalidCorrelation : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

}  // namespace steplab
