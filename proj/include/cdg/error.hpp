#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdg {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Cholesky failed; pivot() is the zero-based column whose pivot was not positive.
class FactorizationError : public Error {
 public:
  FactorizationError(std::size_t pivot, double value)
      : Error("cholesky: non-positive pivot " + std::to_string(value) + " at index " +
              std::to_string(pivot)),
        pivot_(pivot),
        value_(value) {}

  std::size_t pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t pivot_;
  double value_;
};

// Objective was not finite at the starting point.
class StartError : public Error {
 public:
  using Error::Error;
};

// Malformed input data; line() is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration or command-line input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdg
