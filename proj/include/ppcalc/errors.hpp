#pragma once

#include <stdexcept>
#include <string>

namespace ppcalc {

// Base of every error raised by the library. Carries the module and
// operation that failed so front ends can report them verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string operation, const std::string& message)
      : std::runtime_error("[" + module + "/" + operation + "] " + message),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

// Parameter outside its admissible range, malformed request.
class ConfigError : public Error {
  using Error::Error;
};

// Request exceeds a hard enumeration or dimension ceiling.
class SizeLimitError : public ConfigError {
  using ConfigError::ConfigError;
};

// Operation not defined for the given family or intensity shape.
class UnsupportedOperation : public ConfigError {
  using ConfigError::ConfigError;
};

// Empty or malformed input data (not a file-system failure).
class InputError : public ConfigError {
  using ConfigError::ConfigError;
};

class NumericError : public Error {
  using Error::Error;
};

// An integral that must be finite is not (e.g. untilted stable moments).
class DivergenceError : public NumericError {
  using NumericError::NumericError;
};

// Sequential sampler hit a state with zero total weight.
class DegenerateModelError : public NumericError {
  using NumericError::NumericError;
};

class IoError : public Error {
  using Error::Error;
};

}  // namespace ppcalc
