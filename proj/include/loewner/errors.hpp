#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace loewner {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input problems: bad parameters, out-of-domain arguments, parse failures.
class InputError : public Error {
public:
    using Error::Error;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

class ParameterError : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedError : public InputError {
public:
    using InputError::InputError;
};

/// A check's hypothesis does not hold for the supplied driver.
class PreconditionError : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t position)
        : InputError(what + " (at position " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Numerical failures during integration or composition.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, std::size_t step)
        : NumericalError(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The adaptive integrator could not shrink its step further before the
/// swallow criterion was met. Carries the last accepted state.
class AmbiguousSwallowError : public NumericalError {
public:
    AmbiguousSwallowError(double t, std::complex<double> g, double driver_value)
        : NumericalError("step underflow before swallow could be decided"),
          t_(t), g_(g), driver_value_(driver_value) {}

    double time() const noexcept { return t_; }
    std::complex<double> state() const noexcept { return g_; }
    double driver_value() const noexcept { return driver_value_; }

private:
    double t_;
    std::complex<double> g_;
    double driver_value_;
};

class InsufficientDataError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A sampled path does not cover the requested range.
class CoverageError : public InputError {
public:
    using InputError::InputError;
};

class RangeError : public InputError {
public:
    using InputError::InputError;
};

/// Output files could not be written.
class IoError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace loewner
