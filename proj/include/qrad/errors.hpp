#pragma once

#include <stdexcept>
#include <string>

namespace qrad {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A record failed its construction-time invariants.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical integration produced non-finite or non-integrable coefficients.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Calibration input does not support the requested protocol step.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qrad
