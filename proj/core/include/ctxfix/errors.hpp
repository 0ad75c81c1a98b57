#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctxfix {

/// Root of every recoverable error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, k > n, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DatabaseFormatError : public Error {
public:
    using Error::Error;
};

/// The external analyzer binary could not be spawned.
class ToolUnavailable : public Error {
public:
    using Error::Error;
};

/// The external analyzer produced output that is not the expected JSON array.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class QueryParseError : public Error {
public:
    QueryParseError(const std::string& message, std::size_t position)
        : Error(message + " (at offset " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// A synthesized structural query could not be turned into a valid query.
class QueryRejected : public Error {
public:
    using Error::Error;
};

class EncoderUnavailable : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class EmptyCompletion : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace ctxfix
