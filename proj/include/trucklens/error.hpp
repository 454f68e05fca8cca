#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trucklens {

enum class ErrorCode {
  invalid_argument,
  parse,
  design,
  io,
  not_found,
  state,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The C API maps
/// `code()` onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Input could not be decoded. `line()` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace trucklens
