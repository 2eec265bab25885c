#pragma once

#include <stdexcept>
#include <string>

namespace mrirdlmc {

enum class ErrorKind {
  BadMagic,
  TruncatedFile,
  UnsupportedDtype,
  IoFailure,
  UnknownKey,
  MalformedLine,
  NonNumericValue,
  ConstraintViolation,
  WrongRank,
  ShapeMismatch,
  BadExtent,
  GeometryMismatch,
  NonFiniteIterate,
  StepTooLarge,
  DegenerateInput,
  InfeasibleBudget,
  SpecViolation,
  ZeroReference,
  EmptyMask,
};

const char* to_string(ErrorKind kind) noexcept;

// All library failures are reported through this one exception type; the
// kind lets callers (notably the CLI) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mrirdlmc
