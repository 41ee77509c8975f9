#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multiflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible dimension or shape.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value was violated (range, ordering, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its domain (1/0, log of a non-positive
/// value, non-finite result).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Syntax or name-resolution failure in the expression language.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace multiflow
