#pragma once

#include <stdexcept>
#include <string>

namespace potkit {

/// Precondition violation (point outside domain, invalid parameters, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A quadrature failed to reach its relative error target within budget.
/// Carries the error actually achieved so callers can decide what to do.
class ToleranceFailure : public std::runtime_error {
public:
    ToleranceFailure(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_error(achieved) {}
    double achieved_error;
};

/// An integral was detected to diverge (value keeps growing under
/// truncation refinement, or the analytic tail exponent is non-integrable).
class DivergenceSignal : public std::runtime_error {
public:
    explicit DivergenceSignal(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace potkit
