#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace keymps {

enum class ErrorCode {
  InvalidArgument,
  InvalidBasisCount,
  DemoTooShort,
  DegenerateDemo,
  StepTooCoarse,
  NumericalDivergence,
  EmptyPlan,
  UnknownPrimitive,
  OutOfWorkspace,
  NoObjectFound,
  EmptyPairs,
  BackendUnavailable,
  MalformedResponse,
  UnknownKeyword,
  InvalidKeypoint,
  MockNoRule,
  BadScenario,
  UpsampleRefused,
  InsufficientGenerated,
  RefusedOverwrite,
  ParseError,
  IoError,
  ConfigError,
};

// Maps onto the CLI exit codes: validation 2, backend 3, pipeline stage 4.
enum class ErrorCategory { Validation, Backend, Pipeline };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

struct ErrorDetail {
  std::optional<std::size_t> index;  // offending pair / segment / line
  std::string raw;                   // verbatim backend text, when relevant
  int attempts = 0;                  // backend attempts made before giving up
  std::string stage;                 // pipeline stage that raised the error
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, ErrorDetail detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }  // what() without the code prefix
  const ErrorDetail& detail() const noexcept { return detail_; }
  std::optional<std::size_t> index() const noexcept { return detail_.index; }
  const std::string& raw() const noexcept { return detail_.raw; }
  int attempts() const noexcept { return detail_.attempts; }
  const std::string& stage() const noexcept { return detail_.stage; }

  // Copy of this error tagged with the pipeline stage that raised it.
  Error in_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string message_;
  ErrorDetail detail_;
};

}  // namespace keymps
