#pragma once

#include <stdexcept>
#include <string>

namespace searpc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user input: inconsistent sizes, invalid parameters, malformed files.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

/// Numerical breakdown: indefinite Hankel matrix, rank deficiency,
/// singular stiffness, degenerate data.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace searpc
