#pragma once

#include <stdexcept>
#include <string>

namespace optotherm {

/// Argument outside the mathematical domain of an operation (negative width,
/// nonpositive temperature, singular covariance, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A Fock cutoff (optical or mechanical) is too small for the requested
/// accuracy. Callers are expected to retry with a larger cutoff.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical method failed its own self-check (quadrature doubling,
/// symplectic residual, negative Fisher information, grid coverage).
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition of a function (e.g. a
/// non-Hermitian matrix passed to a Hermitian eigensolver).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace optotherm
