#pragma once

#include <stdexcept>
#include <string>

namespace nonlindep {

/// Failure categories raised by the library. Each maps onto one process exit
/// code in the command-line tool (see exit_code()).
enum class ErrorCode {
  format,             // malformed file header or payload
  data,               // non-finite or otherwise invalid sample values
  consistency,        // mismatched shapes, node lists, (T, Q) keys
  sequencing,         // calendar discontinuity between concatenated grids
  insufficient_data,  // too few samples for the requested statistic
  degenerate,         // constant series, zero-spread calendar phase
  singularity,        // |rho| >= 1 and similar poles
  configuration,      // invalid user-supplied parameters
  bounds,             // node index out of range
  io,                 // unreadable or unwritable path
};

const char* to_string(ErrorCode code) noexcept;

/// Exit codes: 2 config error, 3 data error, 4 numerical error.
int exit_code(ErrorCode code) noexcept;

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

}  // namespace nonlindep
