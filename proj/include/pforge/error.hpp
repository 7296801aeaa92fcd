#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pforge {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  NoTailBound,
  IncomparableModels,
  DisjointnessViolation,
  DivergentAtP,
  BudgetExceeded,
  InvalidRSequence,
  ModelMismatch,
  SeedCollision,
  AllZero,
  ConstantTerm,
  DuplicateRows,
  UnsupportedLeaf,
  SupportTooLarge,
  ZeroVector,
  UnclassifiableFamily,
  MissingResident,
  OverlapDetected,
  SchemaMismatch,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract violation named by the calling operation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pforge
