#include "lagcast/error.hpp"

namespace lagcast {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnknownCanton: return "UnknownCanton";
    case ErrorKind::ZeroNationalCases: return "ZeroNationalCases";
    case ErrorKind::MissingMonths: return "MissingMonths";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::LagTooLarge: return "LagTooLarge";
    case ErrorKind::KnotsOutOfRange: return "KnotsOutOfRange";
    case ErrorKind::DegenerateBoundary: return "DegenerateBoundary";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::NegativeY: return "NegativeY";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::MisalignedInputs: return "MisalignedInputs";
    case ErrorKind::AllZeroResponse: return "AllZeroResponse";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ColumnMismatch: return "ColumnMismatch";
    case ErrorKind::EmptyDesign: return "EmptyDesign";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::NoOobRows: return "NoOobRows";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::SingularRegressors: return "SingularRegressors";
    case ErrorKind::HorizonZero: return "HorizonZero";
    case ErrorKind::ZeroMeanRisk: return "ZeroMeanRisk";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::MisalignedScores: return "MisalignedScores";
    case ErrorKind::HorizonExceedsVar: return "HorizonExceedsVar";
    case ErrorKind::TooFewResiduals: return "TooFewResiduals";
    case ErrorKind::MissingObservations: return "MissingObservations";
    case ErrorKind::UnstableGenerator: return "UnstableGenerator";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::NonNumericField: return "NonNumericField";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DegenerateBoundary:
    case ErrorKind::RankDeficient:
    case ErrorKind::AllZeroResponse:
    case ErrorKind::NonConvergence:
    case ErrorKind::NoOobRows:
    case ErrorKind::SingularRegressors:
    case ErrorKind::ZeroMeanRisk:
    case ErrorKind::TooFewResiduals:
      return ErrorCategory::numerical;
    default:
      return ErrorCategory::validation;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

int exit_code(const Error& error) noexcept {
  return error.category() == ErrorCategory::validation ? 1 : 2;
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace lagcast
