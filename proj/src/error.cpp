#include "feqi/error.hpp"

namespace feqi {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonconformingMesh: return "NonconformingMesh";
    case ErrorCode::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorCode::UnknownSimplex: return "UnknownSimplex";
    case ErrorCode::NotFaceConnected: return "NotFaceConnected";
    case ErrorCode::NoAdmissibleAnchor: return "NoAdmissibleAnchor";
    case ErrorCode::HostMismatch: return "HostMismatch";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::NotASubsimplex: return "NotASubsimplex";
    case ErrorCode::NotABubble: return "NotABubble";
    case ErrorCode::SingularPairing: return "SingularPairing";
    case ErrorCode::TraceUnavailable: return "TraceUnavailable";
    case ErrorCode::MomentSystemRankDeficient: return "MomentSystemRankDeficient";
    case ErrorCode::MissingExteriorDerivative: return "MissingExteriorDerivative";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), m_code(code) {}

}  // namespace feqi
