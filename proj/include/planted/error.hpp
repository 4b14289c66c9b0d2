#pragma once

#include <stdexcept>
#include <string>

namespace planted {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDomain = 2,
  kInfeasible = 3,
  kIo = 4,
  kNumeric = 5,
};

// Every failure in the core library is raised as this exception; the C API
// maps the code onto its status enum.
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

}  // namespace planted
