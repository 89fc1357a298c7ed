#include "layoutpref/error.hpp"

namespace layoutpref {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidToken: return "invalid-token";
    case ErrorCode::kMalformedOutput: return "malformed-output";
    case ErrorCode::kDegenerateElement: return "degenerate-element";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
    case ErrorCode::kInvalidCanvas: return "invalid-canvas";
    case ErrorCode::kMissingAsset: return "missing-asset";
    case ErrorCode::kUnparsableVerdict: return "unparsable-verdict";
    case ErrorCode::kJudgeUnavailable: return "judge-unavailable";
    case ErrorCode::kCacheError: return "cache-error";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kSchemaError: return "schema-error";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kTokenOutOfRange: return "token-out-of-range";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
  }
  return "unknown-error";
}

}  // namespace layoutpref
