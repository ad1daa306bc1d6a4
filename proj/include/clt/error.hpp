#pragma once

#include <stdexcept>
#include <string>

namespace clt {

// Every failure surfaced to callers carries a stable machine-readable code
// ("reduction-limit", "stale-choice", ...) next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct SourcePos {
  int line = 1;
  int column = 1;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message)
      : Error("parse", std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
        pos_(pos) {}

  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

}  // namespace clt
