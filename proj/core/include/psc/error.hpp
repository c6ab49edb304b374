#pragma once

#include <stdexcept>
#include <string>

namespace psc {

// Base class for every error raised by the library. Messages are single-line
// so the CLI can print them verbatim as its diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (CSV cells, IDX headers, model containers).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Incompatible matrix/vector dimensions or row counts.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or violated precondition on a scalar argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Iterative numerics that failed to converge or produced non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Model container problems: unsupported version, checksum mismatch.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace psc
