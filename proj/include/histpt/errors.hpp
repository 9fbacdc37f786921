#pragma once

#include <stdexcept>
#include <string>

namespace histpt {

/// Degenerate numeric input (zero-norm vector, non-finite value).
class DegenerateInputError : public std::runtime_error {
 public:
  explicit DegenerateInputError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Invalid configuration value (bad temperature, unsatisfiable constraint, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller violated an operation contract (dimension mismatch, empty input).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed file content; message carries the offending location.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace histpt
