#include "trucklens/error.hpp"

namespace trucklens {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::design: return "design error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::not_found: return "not found";
    case ErrorCode::state: return "invalid state";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::parse, line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

}  // namespace trucklens
