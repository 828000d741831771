#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace patchant {

// Invalid inputs: geometry, configuration, malformed partitions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Query outside the domain covered by tabulated data.
class RangeError : public std::out_of_range {
public:
    RangeError(const std::string& what, double lo, double hi)
        : std::out_of_range(what), lo_(lo), hi_(hi) {}
    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

// A physical or mathematical precondition that has no solution (e.g. no bound mode).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Degenerate statistical input that must be routed through a delta-distribution path.
class DegenerateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature that did not reach the requested tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate, double error)
        : std::runtime_error(what), estimate_(estimate), error_(error) {}
    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

class RootFindingError : public std::runtime_error {
public:
    RootFindingError(const std::string& what, std::complex<double> best, double residual)
        : std::runtime_error(what), best_(best), residual_(residual) {}
    std::complex<double> best() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }

private:
    std::complex<double> best_;
    double residual_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace patchant
