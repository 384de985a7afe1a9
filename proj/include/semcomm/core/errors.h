#pragma once

#include <stdexcept>
#include <string>

namespace semcomm {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad shapes, invalid flags, inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or unexpected bytes on the wire.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Non-finite values or violated numeric preconditions.
class NumericError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace semcomm
