#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clt/error.hpp"

namespace clt::detail {

enum class Tok {
  Ident,
  Int,
  String,
  Punct,  // text holds the exact punctuation
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

std::vector<Token> lex(std::string_view src);

}  // namespace clt::detail
