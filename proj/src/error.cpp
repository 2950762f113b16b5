#include "lbsolve/error.hpp"

namespace lbs {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::NorthPoleSingular: return "NORTH_POLE_SINGULAR";
    case ErrorCode::DegenerateCap: return "DEGENERATE_CAP";
    case ErrorCode::DegenerateEllipse: return "DEGENERATE_ELLIPSE";
    case ErrorCode::SelfIntersecting: return "SELF_INTERSECTING";
    case ErrorCode::TooFewVertices: return "TOO_FEW_VERTICES";
    case ErrorCode::ZeroSpeed: return "ZERO_SPEED";
    case ErrorCode::OverlappingIslands: return "OVERLAPPING_ISLANDS";
    case ErrorCode::AnchorOutsideIsland: return "ANCHOR_OUTSIDE_ISLAND";
    case ErrorCode::CoincidentPoints: return "COINCIDENT_POINTS";
    case ErrorCode::TargetOnBoundary: return "TARGET_ON_BOUNDARY";
    case ErrorCode::TargetEqualsSource: return "TARGET_EQUALS_SOURCE";
    case ErrorCode::TargetInsideIsland: return "TARGET_INSIDE_ISLAND";
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::NoRun: return "NO_RUN";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::SingularSchur: return "SINGULAR_SCHUR";
    case ErrorCode::SingularMatrix: return "SINGULAR_MATRIX";
    case ErrorCode::TooLarge: return "TOO_LARGE";
    case ErrorCode::VortexInsideIsland: return "VORTEX_INSIDE_ISLAND";
    case ErrorCode::CoincidentPole: return "COINCIDENT_POLE";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::GeometryParse: return "GEOMETRY_PARSE";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace lbs
