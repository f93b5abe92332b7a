#pragma once

#include <stdexcept>
#include <string>

namespace kmsf {

/// Base for every error the library raises. The C API maps the concrete
/// subclass onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Configured caps (vertex count, detour count, ...) were exceeded.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Two computations that must agree did not, or inputs contradict each other.
class Inconsistency : public Error {
 public:
  using Error::Error;
};

/// The graph fails the simplicity gate (cofinality or condition L).
class NotSimple : public Error {
 public:
  using Error::Error;
};

class NumericOverflow : public Error {
 public:
  using Error::Error;
};

}  // namespace kmsf
