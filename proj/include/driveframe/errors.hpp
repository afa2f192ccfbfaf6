#pragma once

#include <stdexcept>
#include <string>

namespace driveframe {

// Base error for anything that goes wrong at runtime (I/O, backends, storage).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input: malformed files, schema violations, out-of-contract arguments.
// The CLI maps this to exit code 1, everything else to 2.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

} // namespace driveframe
