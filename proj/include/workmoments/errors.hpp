// errors.hpp: exception types shared by all modules

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace workmoments {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SizeError : public Error {       // dimension cap exceeded
public:
    using Error::Error;
};

class ShapeError : public Error {      // mismatched operand dimensions
public:
    using Error::Error;
};

class DomainError : public Error {     // input outside an operation's domain
public:
    using Error::Error;
};

class NumericError : public Error {    // non-convergence, positivity loss, ...
public:
    using Error::Error;
};

class StepSizeError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace workmoments
