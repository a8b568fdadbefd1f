#pragma once

#include <stdexcept>
#include <string>

namespace clmm {

// Invalid construction input (bad position, malformed snapshot, bad parameter).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (p <= 0, empty reserve, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A swap or price move that needs liquidity where the profile has none.
class InsufficientLiquidityError : public std::runtime_error {
public:
    InsufficientLiquidityError(const std::string& what, double gap_lo, double gap_hi)
        : std::runtime_error(what), gap_lo_(gap_lo), gap_hi_(gap_hi) {}

    double gap_lo() const noexcept { return gap_lo_; }
    double gap_hi() const noexcept { return gap_hi_; }

private:
    double gap_lo_;
    double gap_hi_;
};

// Quadrature or ODE integration that did not reach the requested accuracy.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}

    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace clmm
