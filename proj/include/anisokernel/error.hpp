#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace anisokernel {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (e.g. K(0)).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or inadmissible parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical integral did not reach its tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}
    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// A matrix that must be symmetric positive definite is not.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance. Carries the
/// last iterate and its residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, std::vector<double> last = {})
        : Error(what), residual_(residual), last_(std::move(last)) {}
    double residual() const noexcept { return residual_; }
    const std::vector<double>& last_iterate() const noexcept { return last_; }

private:
    double residual_;
    std::vector<double> last_;
};

} // namespace anisokernel
