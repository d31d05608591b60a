#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace v2x {

/// Invalid or incomplete system configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model/dataset/config text. Carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Vector/matrix dimensions do not agree (feature width vs. model input, etc.).
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace v2x
