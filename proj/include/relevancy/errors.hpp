#pragma once

#include <stdexcept>
#include <string>

namespace relevancy {

// Bad arguments, malformed records, contract violations. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and serialization failures. CLI exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace relevancy
