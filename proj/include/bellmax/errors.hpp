#pragma once

#include <stdexcept>
#include <string>

namespace bellmax {

/// Bad argument or precondition violation (CLI exit code 2).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested size exceeds the configured qubit limit.
class ResourceError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// File could not be read or written (CLI exit code 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input matrix is not a valid density matrix (CLI exit code 4).
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal numerical consistency check failed.
class NumericalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace bellmax
