#pragma once

#include <stdexcept>
#include <string>

namespace lbs {

enum class ErrorCode {
  InvalidArgument,
  NorthPoleSingular,
  DegenerateCap,
  DegenerateEllipse,
  SelfIntersecting,
  TooFewVertices,
  ZeroSpeed,
  OverlappingIslands,
  AnchorOutsideIsland,
  CoincidentPoints,
  TargetOnBoundary,
  TargetEqualsSource,
  TargetInsideIsland,
  DimensionMismatch,
  NoRun,
  NoConvergence,
  SingularSchur,
  SingularMatrix,
  TooLarge,
  VortexInsideIsland,
  CoincidentPole,
  ConfigInvalid,
  GeometryParse,
  Io,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lbs
