#pragma once

#include <stdexcept>
#include <string>

namespace ccv {

enum class ErrorCode {
  InvalidArgument,
  InvalidSpec,
  OutOfBounds,
  DimensionMismatch,
  Domain,
  DegenerateFit,
  TrainingFailure,
  SearchFailure,
  InvalidQuery,
  RefinementFailure,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

// Single exception type for the core; the C layer maps code() to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace ccv
