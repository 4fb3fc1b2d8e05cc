#pragma once

#include <stdexcept>
#include <string>

namespace hgcml {

enum class ErrorKind {
  Io,
  MalformedRecord,
  UnknownType,
  UnknownRelation,
  UnknownNode,
  EndpointTypeMismatch,
  DuplicateNodeId,
  FeatureRowMissing,
  NonFiniteFeature,
  TypeChainBroken,
  ShapeMismatch,
  NonFiniteResult,
  KTooLarge,
  TauNonPositive,
  EmptyPositives,
  DegenerateSplit,
  LengthMismatch,
  ModeInvalid,
  DivergedLoss,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit code for an error raised by the pipeline.
int exit_code_for(ErrorKind kind);

}  // namespace hgcml
