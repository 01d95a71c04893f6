#pragma once

#include <stdexcept>
#include <string>

namespace bergman_lab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (maps to CLI exit code 2).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration; the message names the offending key (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Quadrature, root finding or factorization failed (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace bergman_lab
