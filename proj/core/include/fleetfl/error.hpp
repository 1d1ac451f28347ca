#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fleetfl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based row that failed.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Geometry that makes a link budget undefined (e.g. zero distance).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Inputs that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace fleetfl
