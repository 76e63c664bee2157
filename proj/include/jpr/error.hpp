#pragma once

#include <stdexcept>
#include <string>

namespace jpr {

// Base for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated input (JPEG streams, checkpoints, manifests).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Valid input using a feature outside the supported baseline subset.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Tensor or image dimensions that do not match what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (range, tag or argument domain).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace jpr
