#include "ccovoxel/error.hpp"

namespace ccv {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::InvalidSpec: return "invalid spec";
    case ErrorCode::OutOfBounds: return "out of bounds";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::DegenerateFit: return "degenerate fit";
    case ErrorCode::TrainingFailure: return "training failure";
    case ErrorCode::SearchFailure: return "search failure";
    case ErrorCode::InvalidQuery: return "invalid query";
    case ErrorCode::RefinementFailure: return "refinement failure";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
  }
  return "unknown error";
}

}  // namespace ccv
