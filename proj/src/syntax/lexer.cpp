#include "lexer.hpp"

#include <array>
#include <cctype>

namespace clt::detail {

namespace {
// Longest match first.
constexpr std::array<std::string_view, 23> kPunct = {
    "?-", "->", "/\\", "\\/", ">=", "\\", "(", ")", ",", ".", "&", "|",
    "@",  "#",  "!",   "+",   "-",  "*",  "=", "{", "}", "/", ";"};
}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  SourcePos pos;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
  };

  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourcePos start = pos;
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), start});
      advance(j - i);
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), start});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string text;
      advance(1);
      while (true) {
        if (i >= src.size() || src[i] == '\n') throw ParseError(start, "unterminated string");
        if (src[i] == '"') break;
        if (src[i] == '\\' && i + 1 < src.size()) advance(1);
        text += src[i];
        advance(1);
      }
      advance(1);
      out.push_back({Tok::String, std::move(text), start});
      continue;
    }
    bool matched = false;
    for (auto p : kPunct) {
      if (src.substr(i, p.size()) == p) {
        out.push_back({Tok::Punct, std::string(p), start});
        advance(p.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(start, std::string("unexpected character '") + src[i] + "'");
  }
  out.push_back({Tok::End, "", pos});
  return out;
}

}  // namespace clt::detail
