#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layoutpref {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidToken,
  kMalformedOutput,
  kDegenerateElement,
  kEmptyDataset,
  kInvalidCanvas,
  kMissingAsset,
  kUnparsableVerdict,
  kJudgeUnavailable,
  kCacheError,
  kParseError,
  kSchemaError,
  kIoError,
  kLengthMismatch,
  kTokenOutOfRange,
  kShapeMismatch,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (the CLI in particular) can map them to exit statuses and skip
// reasons without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace layoutpref
