#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace flockscope {

// All library failures carry a stable machine-readable code alongside the
// human message, so callers can emit structured errors without string-matching.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct ParseError : Error {
  ParseError(const std::string& message, std::int64_t line = -1)
      : Error("parse_error",
              line >= 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_number(line) {}
  std::int64_t line_number;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& message)
      : Error("validation_error", message) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

struct IoError : Error {
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace flockscope
