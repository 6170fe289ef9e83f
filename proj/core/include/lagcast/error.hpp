#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagcast {

enum class ErrorKind {
  // panel-core
  UnknownCanton,
  ZeroNationalCases,
  MissingMonths,
  DuplicateKey,
  LagTooLarge,
  // basis
  KnotsOutOfRange,
  DegenerateBoundary,
  InvalidSpec,
  // zadist
  NegativeY,
  InvalidParams,
  // gamlss
  RankDeficient,
  MisalignedInputs,
  AllZeroResponse,
  NonConvergence,
  ColumnMismatch,
  // forest
  EmptyDesign,
  WidthMismatch,
  NoOobRows,
  // var-forecast
  InsufficientData,
  SingularRegressors,
  HorizonZero,
  // metrics
  ZeroMeanRisk,
  InvalidAlpha,
  MisalignedScores,
  // pipeline
  HorizonExceedsVar,
  TooFewResiduals,
  MissingObservations,
  UnstableGenerator,
  // cli-io
  ParseError,
  UnknownKey,
  ConstraintViolation,
  HeaderMismatch,
  NonNumericField,
  MissingFile,
  IoError,
};

// Validation errors are bad inputs (exit code 1); numerical errors are
// failures of an estimation routine on otherwise valid inputs (exit code 2).
enum class ErrorCategory { validation, numerical };

std::string_view to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

// 1 for validation errors, 2 for numerical failures.
int exit_code(const Error& error) noexcept;

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace lagcast
