#include "hgcml/error.hpp"

namespace hgcml {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnknownType: return "UnknownType";
    case ErrorKind::UnknownRelation: return "UnknownRelation";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::EndpointTypeMismatch: return "EndpointTypeMismatch";
    case ErrorKind::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorKind::FeatureRowMissing: return "FeatureRowMissing";
    case ErrorKind::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorKind::TypeChainBroken: return "TypeChainBroken";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteResult: return "NonFiniteResult";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::TauNonPositive: return "TauNonPositive";
    case ErrorKind::EmptyPositives: return "EmptyPositives";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ModeInvalid: return "ModeInvalid";
    case ErrorKind::DivergedLoss: return "DivergedLoss";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::ModeInvalid:
    case ErrorKind::TauNonPositive:
    case ErrorKind::KTooLarge:
      return 3;
    case ErrorKind::DivergedLoss:
    case ErrorKind::NonFiniteResult:
      return 4;
    default:
      return 2;
  }
}

}  // namespace hgcml
