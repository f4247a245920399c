#pragma once

#include <stdexcept>
#include <string>

namespace geogns {

// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A computation produced or received non-finite values, or a quantity
// needed as a divisor vanished.
class NumericalError : public Error {
public:
    using Error::Error;
};

// A run configuration could not be parsed or validated.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace geogns
