#pragma once

#include <stdexcept>
#include <string>

namespace feqi {

/// Failure categories raised by the library. Every thrown feqi::Error carries one.
enum class ErrorCode {
  NonconformingMesh,
  DegenerateSimplex,
  UnknownSimplex,
  NotFaceConnected,
  NoAdmissibleAnchor,
  HostMismatch,
  DegreeOverflow,
  DegreeMismatch,
  NotASubsimplex,
  NotABubble,
  SingularPairing,
  TraceUnavailable,
  MomentSystemRankDeficient,
  MissingExteriorDerivative,
  WrongDimension,
  UnknownTarget,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return m_code; }

 private:
  ErrorCode m_code;
};

}  // namespace feqi
