#include "hcc/error.hpp"

namespace hcc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kParse:
      return "parse_error";
    case ErrorCode::kValidation:
      return "validation_error";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kHashMismatch:
      return "hash_mismatch";
    case ErrorCode::kVersionMismatch:
      return "version_mismatch";
    case ErrorCode::kCoverExplosion:
      return "cover_explosion";
    case ErrorCode::kIo:
      return "io_error";
    case ErrorCode::kInternal:
      return "internal_error";
  }
  return "unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCoverExplosion:
    case ErrorCode::kIo:
    case ErrorCode::kInternal:
      return false;
    default:
      return true;
  }
}

}  // namespace hcc
