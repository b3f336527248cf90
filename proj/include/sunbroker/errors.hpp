#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sunbroker {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid numeric input (out-of-range argument, zero denominator, ...).
struct DomainError : Error {
    using Error::Error;
};

// Malformed input data; carries the 1-based line number when known.
struct FormatError : Error {
    std::size_t line = 0;
    FormatError(const std::string& msg, std::size_t line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Iterative solver hit its iteration cap before reaching tolerance.
struct ConvergenceError : Error {
    std::size_t iterations = 0;
    ConvergenceError(const std::string& msg, std::size_t iters)
        : Error(msg + " after " + std::to_string(iters) + " iterations"), iterations(iters) {}
};

// Bad scenario/config value; carries the offending key.
struct ConfigError : Error {
    std::string key;
    ConfigError(const std::string& k, const std::string& msg)
        : Error("config key '" + k + "': " + msg), key(k) {}
};

struct NotFoundError : Error {
    using Error::Error;
};

// Command asks for more resources than exist.
struct CapacityError : Error {
    using Error::Error;
};

// Accounting cross-check failed (e.g. usage exceeds what was offered).
struct IntegrityError : Error {
    using Error::Error;
};

// Operation on an object past its lifecycle (e.g. publish on a closed bus).
struct LifecycleError : Error {
    using Error::Error;
};

// Categorical label not in the model vocabulary.
struct VocabularyError : Error {
    using Error::Error;
};

// Vector/matrix dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

} // namespace sunbroker
