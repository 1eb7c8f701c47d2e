#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dstbm {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or inputs that violate a type's invariants.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A time index outside the horizon of a trace.
class RangeError : public Error {
public:
    using Error::Error;
};

// A mobile sensing query made before the first scan instant.
class NoObservation : public Error {
public:
    using Error::Error;
};

// Accuracy requested over an empty set of decisions.
class NoData : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace dstbm
