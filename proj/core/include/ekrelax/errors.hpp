#pragma once

#include <stdexcept>
#include <string>

namespace ekrelax {

/// Input outside the domain of a constitutive law (negative density, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Evaluation at a point where the law is singular (rho = 0 with s < 0).
class SingularInputError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A ratio requested at a point where it is 0/0.
class UndefinedRatioError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Invalid parameters or configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mismatched grids, times or other caller mistakes.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Density floor violation or non-finite values during time stepping.
/// Maps to CLI exit code 3.
class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// A numerical sub-procedure failed its own accuracy control.
class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two independent evaluations of the same quantity disagree.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace ekrelax
