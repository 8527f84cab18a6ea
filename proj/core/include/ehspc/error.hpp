#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ehspc {

enum class ErrorCode {
  kInvalidArgument,  // precondition on a numeric argument violated
  kDomain,           // value outside the mathematical domain of an operation
  kShapeMismatch,
  kParse,
  kVersionMismatch,
  kNonFinite,
  kInvariant,
  kIo,
  kUndefined,  // result mathematically undefined (e.g. latency at BLER = 1)
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ehspc
