#include "privshard/error.h"

namespace privshard {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kArgument:
      return "argument";
    case ErrorCode::kConfig:
      return "config";
    case ErrorCode::kAuthorization:
      return "authorization";
    case ErrorCode::kAuthentication:
      return "authentication";
    case ErrorCode::kNotFound:
      return "not-found";
    case ErrorCode::kState:
      return "state";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kCrypto:
      return "crypto";
    case ErrorCode::kInternal:
      return "internal";
  }
  return "unknown";
}

}  // namespace privshard
