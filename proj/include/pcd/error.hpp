#pragma once

#include <stdexcept>
#include <string>

namespace pcd {

enum class ErrorCode {
  InvalidArgument,
  Configuration,
  DimensionMismatch,
  Domain,
  Io,
  Crowded,
};

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

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

// Literal messages stay unallocated on the success path.
inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace pcd
