#pragma once

#include <stdexcept>
#include <string>

namespace fairrank {

/// Raised when caller-supplied input breaks a precondition (bad argument,
/// malformed configuration). The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when data on disk or in a catalog cannot be used (parse failure,
/// dimension mismatch, duplicate id). The CLI maps it to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairrank
