#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace captive {

/// Broad classes of failure; the CLI maps each to a distinct exit status.
enum class ErrorKind {
  config,      // malformed or inconsistent model/configuration
  domain,      // argument outside the function's domain (e.g. t outside [0, T])
  state,       // process state outside the admissible interval
  validation,  // a validator rejected the model
  numerical,   // NaN/inf produced during simulation
  statistical, // not enough samples for an estimate
  usage,       // API misuse (e.g. time regression)
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorKind::state, what) {}
};

/// Thrown when a model fails validation; `details` holds the validator report
/// as serialized JSON so callers can surface it unchanged.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string details = {})
      : Error(ErrorKind::validation, what), details_(std::move(details)) {}

  const std::string& details() const noexcept { return details_; }

 private:
  std::string details_;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : Error(ErrorKind::numerical, what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class StatisticalError : public Error {
 public:
  explicit StatisticalError(const std::string& what) : Error(ErrorKind::statistical, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace captive
