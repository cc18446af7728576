#pragma once

#include <stdexcept>
#include <string>

namespace privshard {

enum class ErrorCode {
  kArgument,
  kConfig,
  kAuthorization,
  kAuthentication,
  kNotFound,
  kState,
  kIo,
  kCrypto,
  kInternal,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define PRIVSHARD_ENFORCE(cond, code, msg)          \
  do {                                              \
    if (!(cond)) {                                  \
      throw ::privshard::Error((code), (msg));      \
    }                                               \
  } while (0)

}  // namespace privshard
