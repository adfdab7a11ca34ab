#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace binseg {

// Base for every error raised by the library. The CLI maps subclasses to
// stable exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, schema violations, out-of-range values.
class DataError : public Error {
 public:
  using Error::Error;
};

// Violated precondition on an argument (dimension mismatch, invalid depth...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Parse failure carrying a location: a 1-based line number for text formats,
// a byte offset for binary ones, or a JSON pointer for documents.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::string location)
      : DataError(location.empty() ? what : location + ": " + what),
        location_(std::move(location)) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

}  // namespace binseg
