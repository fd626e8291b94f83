#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A Sylvester/Lyapunov operator or a shifted solve is singular.
class SolvabilityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. t < t0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold (e.g. non-negative log norm
/// passed to the stable-case error bound).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Iterative kernel hit its iteration cap without meeting its tolerance.
class IterationLimitError : public Error {
 public:
  using Error::Error;
};

/// Operator lacks a capability the algorithm needs (inverse action).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Matrix that should be positive semidefinite has a clearly negative
/// eigenvalue.
class PsdViolationError : public Error {
 public:
  using Error::Error;
};

/// Problem exceeds the size guard of a dense reference routine.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

/// Sparse factorization failed; carries the offending pivot row.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::ptrdiff_t pivot_row)
      : Error(what), pivot_row_(pivot_row) {}

  std::ptrdiff_t pivot_row() const noexcept { return pivot_row_; }

 private:
  std::ptrdiff_t pivot_row_;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dle
