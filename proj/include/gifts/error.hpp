#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gifts {

enum class ErrorCode {
  MissingBinding,
  UnknownPlaceholder,
  EmptyResponse,
  NoQuestionsFound,
  AmbiguousVerdict,
  Timeout,
  RateLimited,
  TransportError,
  AudioDecodeError,
  RoleViolation,
  UnboundRole,
  ManifestError,
  UnknownField,
  ScopeViolation,
  PreconditionViolation,
  UnparseableJudgeLabel,
  MalformedTriple,
  TooFewIndividuals,
  NoVoicedContent,
  DurationMismatch,
  ZeroNoise,
  ZeroSignal,
  IoError,
  MissingGroundTruth,
  SchemaMismatch,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::UnknownPlaceholder: return "UnknownPlaceholder";
    case ErrorCode::EmptyResponse: return "EmptyResponse";
    case ErrorCode::NoQuestionsFound: return "NoQuestionsFound";
    case ErrorCode::AmbiguousVerdict: return "AmbiguousVerdict";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::AudioDecodeError: return "AudioDecodeError";
    case ErrorCode::RoleViolation: return "RoleViolation";
    case ErrorCode::UnboundRole: return "UnboundRole";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::ScopeViolation: return "ScopeViolation";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::UnparseableJudgeLabel: return "UnparseableJudgeLabel";
    case ErrorCode::MalformedTriple: return "MalformedTriple";
    case ErrorCode::TooFewIndividuals: return "TooFewIndividuals";
    case ErrorCode::NoVoicedContent: return "NoVoicedContent";
    case ErrorCode::DurationMismatch: return "DurationMismatch";
    case ErrorCode::ZeroNoise: return "ZeroNoise";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : Error(code, detail, code == ErrorCode::Timeout || code == ErrorCode::RateLimited ||
                                code == ErrorCode::TransportError) {}

  Error(ErrorCode code, const std::string& detail, bool transient)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        transient_(transient),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Backend failures that a retry may clear.
  bool transient() const noexcept { return transient_; }

 private:
  ErrorCode code_;
  bool transient_;
  std::string detail_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorCode::PreconditionViolation, what);
}

}  // namespace gifts
