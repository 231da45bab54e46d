#pragma once

#include <stdexcept>
#include <string>

namespace assistrag {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Bad or missing configuration (API key absent, unresolvable path, k < 1, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Network failure or non-success HTTP status from a live backend.
class TransportError : public Error {
public:
    TransportError(const std::string& message, int status, std::string body_excerpt)
        : Error(message), status_(status), body_excerpt_(std::move(body_excerpt)) {}

    int status() const { return status_; }
    const std::string& body_excerpt() const { return body_excerpt_; }

private:
    int status_ = 0;
    std::string body_excerpt_;
};

// Mock backend found no matching script entry and has no default response.
class ScriptError : public Error {
public:
    using Error::Error;
};

// Malformed input file. line() is 1-based, 0 when not line-addressable.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message, std::size_t line = 0)
        : Error(message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

// Violated uniqueness or cross-record consistency (duplicate ids, ...).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Persistence I/O failure.
class StorageError : public Error {
public:
    using Error::Error;
};

// Invalid argument values (empty gold list, non-finite log-probabilities, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Assistant produced an empty note.
class NoteError : public Error {
public:
    using Error::Error;
};

} // namespace assistrag
