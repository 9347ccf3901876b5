#include "keymps/error.hpp"

namespace keymps {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidBasisCount: return "InvalidBasisCount";
    case ErrorCode::DemoTooShort: return "DemoTooShort";
    case ErrorCode::DegenerateDemo: return "DegenerateDemo";
    case ErrorCode::StepTooCoarse: return "StepTooCoarse";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::UnknownPrimitive: return "UnknownPrimitive";
    case ErrorCode::OutOfWorkspace: return "OutOfWorkspace";
    case ErrorCode::NoObjectFound: return "NoObjectFound";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::UnknownKeyword: return "UnknownKeyword";
    case ErrorCode::InvalidKeypoint: return "InvalidKeypoint";
    case ErrorCode::MockNoRule: return "MockNoRule";
    case ErrorCode::BadScenario: return "BadScenario";
    case ErrorCode::UpsampleRefused: return "UpsampleRefused";
    case ErrorCode::InsufficientGenerated: return "InsufficientGenerated";
    case ErrorCode::RefusedOverwrite: return "RefusedOverwrite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::MalformedResponse:
    case ErrorCode::UnknownKeyword:
    case ErrorCode::InvalidKeypoint:
    case ErrorCode::MockNoRule:
      return ErrorCategory::Backend;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidBasisCount:
    case ErrorCode::DemoTooShort:
    case ErrorCode::RefusedOverwrite:
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::ConfigError:
    case ErrorCode::BadScenario:
      return ErrorCategory::Validation;
    default:
      return ErrorCategory::Pipeline;
  }
}

Error::Error(ErrorCode code, const std::string& message, ErrorDetail detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message),
      detail_(std::move(detail)) {}

Error Error::in_stage(std::string stage) const {
  Error copy = *this;
  copy.detail_.stage = std::move(stage);
  return copy;
}

}  // namespace keymps
