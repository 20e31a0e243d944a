#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace p2pdb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text could not be parsed; carries a 1-based source location.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// The input lies outside the fragment an engine supports.
class FragmentError : public Error {
public:
    using Error::Error;
};

/// A desk-scale enumeration limit was hit (branching cap, universe size).
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// The simulator gave up before reaching quiescence.
class SimulationError : public Error {
public:
    using Error::Error;
};

} // namespace p2pdb
