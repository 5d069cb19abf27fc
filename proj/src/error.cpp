#include "nonlindep/error.hpp"

namespace nonlindep {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::format: return "format error";
    case ErrorCode::data: return "data error";
    case ErrorCode::consistency: return "consistency error";
    case ErrorCode::sequencing: return "sequencing error";
    case ErrorCode::insufficient_data: return "insufficient-data error";
    case ErrorCode::degenerate: return "degenerate-series error";
    case ErrorCode::singularity: return "singularity error";
    case ErrorCode::configuration: return "configuration error";
    case ErrorCode::bounds: return "bounds error";
    case ErrorCode::io: return "I/O error";
  }
  return "error";
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::configuration:
    case ErrorCode::bounds:
      return 2;
    case ErrorCode::format:
    case ErrorCode::data:
    case ErrorCode::consistency:
    case ErrorCode::sequencing:
    case ErrorCode::io:
      return 3;
    case ErrorCode::insufficient_data:
    case ErrorCode::degenerate:
    case ErrorCode::singularity:
      return 4;
  }
  return 1;
}

}  // namespace nonlindep
