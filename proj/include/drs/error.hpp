#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drs {

enum class ErrorCode {
  // rd-model
  TooFewPoints,
  NonFinite,
  InvalidRange,
  InvalidCurve,
  // rcql
  MismatchedPair,
  NotEvaluable,
  NoComparablePairs,
  DegenerateInput,
  // vqm
  EmptyTrainingSet,
  SchemaMismatch,
  InsufficientContents,
  // avc
  BitstreamExhausted,
  UnsupportedProfile,
  MissingParameterSet,
  MalformedSyntax,
  NoIdrFound,
  // ladder / sim
  IncompleteLog,
  TooManyCandidates,
  InfeasibleK,
  EmptyInput,
  MissingRung,
  NoOverlap,
  NonMonotoneCurve,
  MismatchedTraces,
  // io
  ParseError,
  IoError,
  // internal
  InvariantViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exit-code class used by the CLI: 2 input/schema, 3 infeasible, 4 internal.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws InvariantViolation; used for runtime guards that must never fire.
[[noreturn]] void invariant_failure(const std::string& what);

}  // namespace drs
