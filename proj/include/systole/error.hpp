#pragma once

#include <stdexcept>
#include <string>

namespace systole {

// Numeric values are mirrored by SYSTOLE_E_* in systole.h.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  DegenerateLattice = 2,
  IllConditioned = 3,
  Capacity = 4,
  Domain = 5,
  Resolution = 6,
  Numerical = 7,
  Precondition = 8,
  Parse = 9,
  Reconstruction = 10,
};

const char* error_code_name(ErrorCode code) noexcept;

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

}  // namespace systole
