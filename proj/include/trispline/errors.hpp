#pragma once

#include <stdexcept>
#include <string>

namespace trispline {

// Bad user input: malformed files, inconsistent dimensions, invalid options.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The math gave up: singular systems, degenerate geometry discovered mid-solve.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem trouble.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace trispline
