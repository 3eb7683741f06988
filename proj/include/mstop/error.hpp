#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mstop {

/// Raised when model or policy parameters violate their constraints.
/// Carries one message per violated constraint.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

enum class ResolventErrorKind { Resonance, Divergence };

/// The resolvent integral representation cannot be evaluated in closed form
/// for the given power sum.
class ResolventError : public std::domain_error {
public:
    ResolventError(ResolventErrorKind kind, double exponent, const std::string& what);

    ResolventErrorKind kind() const noexcept { return kind_; }
    double exponent() const noexcept { return exponent_; }

private:
    ResolventErrorKind kind_;
    double exponent_;
};

/// A solver step failed (bracket without sign change, violated ladder
/// invariant, closed-form reconciliation mismatch).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mstop
