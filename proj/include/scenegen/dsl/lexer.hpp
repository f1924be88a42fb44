#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "scenegen/dsl/token.hpp"
#include "scenegen/errors.hpp"

namespace scenegen::dsl {

class LexError : public SourceError {
 public:
  using SourceError::SourceError;
};

/// Splits scenario source into tokens. `#` starts a comment running to the
/// end of the line; whitespace (including newlines) only separates tokens.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const int tl = line, tc = col;

    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      const TokenKind kind = is_keyword(word) ? TokenKind::Keyword : TokenKind::Ident;
      out.push_back({kind, std::move(word), tl, tc, static_cast<int>(j - i)});
      advance(j - i);
      continue;
    }

    if (is_digit(c)) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        if (j >= src.size() || !is_digit(src[j])) throw LexError(tl, tc, "malformed number");
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == '.' || is_ident_char(src[j])))
        throw LexError(tl, tc, "malformed number");
      out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), tl, tc,
                     static_cast<int>(j - i)});
      advance(j - i);
      continue;
    }

    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        const char d = src[j];
        if (d == '"') {
          closed = true;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (j + 1 >= src.size() || (src[j + 1] != '"' && src[j + 1] != '\\'))
            throw LexError(tl, tc, "bad escape in string literal");
          value.push_back(src[j + 1]);
          j += 2;
          continue;
        }
        value.push_back(d);
        ++j;
      }
      if (!closed) throw LexError(tl, tc, "unterminated string literal");
      out.push_back({TokenKind::String, std::move(value), tl, tc, static_cast<int>(j + 1 - i)});
      advance(j + 1 - i);
      continue;
    }

    static constexpr std::string_view kTwoChar[] = {"==", "!=", "<=", ">="};
    bool matched = false;
    for (auto op : kTwoChar) {
      if (src.substr(i, 2) == op) {
        out.push_back({TokenKind::Punct, std::string(op), tl, tc, 2});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;

    static constexpr std::string_view kOneChar = "()[],:=<>+-*/";
    if (kOneChar.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), tl, tc, 1});
      advance(1);
      continue;
    }
    throw LexError(tl, tc, std::string("illegal character '") + c + "'");
  }
  return out;
}

}  // namespace scenegen::dsl
