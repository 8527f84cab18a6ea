#include "ehspc/error.hpp"

namespace ehspc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kInvariant: return "invariant";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUndefined: return "undefined";
  }
  return "unknown";
}

}  // namespace ehspc
