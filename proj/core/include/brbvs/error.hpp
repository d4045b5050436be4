#pragma once

#include <stdexcept>
#include <string>

namespace brbvs {

/// Base of every error raised by the library. The exit code is what the
/// command-line tool returns when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  [[nodiscard]] virtual int exit_code() const noexcept = 0;
};

/// Invalid configuration, parameters or model specification.
class ConfigError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

/// Parameter outside the admissible domain of a function (e.g. copula theta).
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// Numerical failure: non-finite likelihood, singular systems, quadrature.
class NumericalError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 4; }
};

}  // namespace brbvs
