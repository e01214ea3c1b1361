#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gattaca {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// The instance is too large for explicit-state analysis.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or invalid configuration / arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a solver that failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The simulated environment could not reach a pseudo-attractor state within budget.
class EnvironmentFault : public Error {
 public:
  using Error::Error;
};

/// A query has no answer: no target attractor, no strategy, nothing to control.
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

}  // namespace gattaca
