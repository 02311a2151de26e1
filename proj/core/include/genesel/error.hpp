#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace genesel {

/// Input violates a documented precondition (bad shape, bad label, bad config).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV content. Carries the 1-based line number of the offending row.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A leaf whose curvature H + lambda is zero has no finite optimal weight.
class DegenerateLeafError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Stage 1 retained no gene with positive importance.
class EmptySelectionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace genesel
