#pragma once

#include <array>
#include <string>
#include <string_view>

namespace scenegen::dsl {

enum class TokenKind { Keyword, Ident, Number, String, Punct };

struct Token {
  TokenKind kind = TokenKind::Punct;
  std::string lexeme;  // strings hold the unquoted, unescaped value
  int line = 1;
  int col = 1;
  int length = 0;  // source span in bytes, quotes included

  bool is(TokenKind k, std::string_view text) const { return kind == k && lexeme == text; }
  bool is_keyword(std::string_view text) const { return is(TokenKind::Keyword, text); }
  bool is_punct(std::string_view text) const { return is(TokenKind::Punct, text); }

  friend bool operator==(const Token&, const Token&) = default;
};

inline constexpr std::array<std::string_view, 35> kKeywords{
    "new",     "at",     "on",       "lane",  "offset",    "by",    "ahead",
    "of",      "behind", "left",     "right", "facing",    "toward", "with",
    "require", "behavior", "take",   "wait",  "do",        "if",    "else",
    "while",   "try",    "interrupt", "when", "end",       "param", "world",
    "and",     "or",     "not",      "true",  "false",     "self",  "Action"};

inline bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

inline std::string_view kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword: return "kw";
    case TokenKind::Ident: return "ident";
    case TokenKind::Number: return "num";
    case TokenKind::String: return "str";
    case TokenKind::Punct: return "punct";
  }
  return "?";
}

}  // namespace scenegen::dsl
