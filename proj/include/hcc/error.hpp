#pragma once

#include <stdexcept>
#include <string>

namespace hcc {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kValidation,
  kNotFound,
  kHashMismatch,
  kVersionMismatch,
  kCoverExplosion,
  kIo,
  kInternal,
};

const char* error_code_name(ErrorCode code);

// Errors caused by user input (bad documents, bad flags) as opposed to
// failures while executing an otherwise valid request.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hcc
