#include "drs/error.hpp"

namespace drs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidCurve: return "InvalidCurve";
    case ErrorCode::MismatchedPair: return "MismatchedPair";
    case ErrorCode::NotEvaluable: return "NotEvaluable";
    case ErrorCode::NoComparablePairs: return "NoComparablePairs";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InsufficientContents: return "InsufficientContents";
    case ErrorCode::BitstreamExhausted: return "BitstreamExhausted";
    case ErrorCode::UnsupportedProfile: return "UnsupportedProfile";
    case ErrorCode::MissingParameterSet: return "MissingParameterSet";
    case ErrorCode::MalformedSyntax: return "MalformedSyntax";
    case ErrorCode::NoIdrFound: return "NoIdrFound";
    case ErrorCode::IncompleteLog: return "IncompleteLog";
    case ErrorCode::TooManyCandidates: return "TooManyCandidates";
    case ErrorCode::InfeasibleK: return "InfeasibleK";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingRung: return "MissingRung";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::NonMonotoneCurve: return "NonMonotoneCurve";
    case ErrorCode::MismatchedTraces: return "MismatchedTraces";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvariantViolation:
      return 4;
    case ErrorCode::InvalidRange:
    case ErrorCode::NotEvaluable:
    case ErrorCode::NoComparablePairs:
    case ErrorCode::DegenerateInput:
    case ErrorCode::InsufficientContents:
    case ErrorCode::TooManyCandidates:
    case ErrorCode::InfeasibleK:
    case ErrorCode::NoOverlap:
    case ErrorCode::NonMonotoneCurve:
      return 3;
    default:
      return 2;
  }
}

void invariant_failure(const std::string& what) {
  throw Error(ErrorCode::InvariantViolation, what);
}

}  // namespace drs
