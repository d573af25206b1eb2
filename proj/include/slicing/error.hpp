#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slicing {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A PRB allocation does not fit into the channel bandwidth.
class InfeasibleAllocation : public Error {
public:
    using Error::Error;
};

/// A scenario file failed to parse or violated an invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A linear solve did not reach the requested residual.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class StateSpaceTooLarge : public Error {
public:
    StateSpaceTooLarge(std::size_t size, std::size_t limit)
        : Error("state space has " + std::to_string(size) + " states, limit is " +
                std::to_string(limit)),
          size_(size) {}
    std::size_t size() const noexcept { return size_; }

private:
    std::size_t size_;
};

} // namespace slicing
