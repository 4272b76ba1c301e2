#pragma once

#include <stdexcept>
#include <string>

namespace moddisc {

/// Base class for all library errors. The exit code is what the CLI returns
/// when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mismatched lengths, too-short inputs, malformed point counts.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A structure failed its invariant checks (e.g. an invalid curve).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// NaN/Inf encountered during optimization or rendering.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

/// Misuse of the differentiation tape (e.g. an unregistered primitive).
class ContractError : public Error {
 public:
  using Error::Error;
};

namespace detail {
[[noreturn]] void throw_shape(const std::string& what);
[[noreturn]] void throw_domain(const std::string& what);
}  // namespace detail

}  // namespace moddisc
