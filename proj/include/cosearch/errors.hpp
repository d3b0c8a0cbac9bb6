#pragma once

#include <stdexcept>
#include <string>

namespace cosearch {

// Errors caused by malformed input (bad files, bad flags). The CLI maps these
// to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line = 0, std::string field = {})
      : InputError(format(what, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& field) {
    std::string msg = "parse error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!field.empty()) msg += " (field '" + field + "')";
    return msg + ": " + what;
  }

  int line_;
  std::string field_;
};

class InvariantViolation : public InputError {
 public:
  InvariantViolation(std::string field, const std::string& what)
      : InputError("invalid '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Errors that are a property of the problem rather than the input format
// (unsupported precision, infeasible target). Exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PrecisionUnsupported : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigurationError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ShapeError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InfeasibleTarget : public DomainError {
 public:
  InfeasibleTarget(std::string constraint, const std::string& what)
      : DomainError("infeasible target (" + constraint + " constraint): " + what),
        constraint_(std::move(constraint)) {}

  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class ZeroOccupancy : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace cosearch
