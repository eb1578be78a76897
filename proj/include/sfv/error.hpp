#pragma once

#include <stdexcept>
#include <string>

namespace sfv {

/// Base class for every error raised by the library. The CLI prints what()
/// verbatim and exits with status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs that violate an operation's preconditions (dimension mismatch,
/// out-of-range parameters).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Factorization failures and other numerical breakdowns.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed files (CSV, JSON configuration).
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace sfv
