#include "scenario_lexer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "bpt/error.hpp"

namespace bpt::lang {
namespace {

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

// Strings end up in JSON (program ids, reports), which requires UTF-8.
bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = 0;
    char32_t cp = 0;
    if (c < 0x80) { ++i; continue; }
    if ((c & 0xE0) == 0xC0) { n = 1; cp = c & 0x1F; }
    else if ((c & 0xF0) == 0xE0) { n = 2; cp = c & 0x0F; }
    else if ((c & 0xF8) == 0xF0) { n = 3; cp = c & 0x07; }
    else return false;
    if (i + n >= s.size()) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[n] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += n + 1;
  }
  return true;
}

}  // namespace

const char* describe(TokenKind kind) {
  switch (kind) {
    case TokenKind::kIdent: return "identifier";
    case TokenKind::kNumber: return "number";
    case TokenKind::kString: return "string";
    case TokenKind::kLParen: return "'('";
    case TokenKind::kRParen: return "')'";
    case TokenKind::kComma: return "','";
    case TokenKind::kAssign: return "'='";
    case TokenKind::kPlus: return "'+'";
    case TokenKind::kMinus: return "'-'";
    case TokenKind::kStar: return "'*'";
    case TokenKind::kSlash: return "'/'";
    case TokenKind::kLess: return "'<'";
    case TokenKind::kLessEq: return "'<='";
    case TokenKind::kGreater: return "'>'";
    case TokenKind::kGreaterEq: return "'>='";
    case TokenKind::kEqEq: return "'=='";
    case TokenKind::kNotEq: return "'!='";
    case TokenKind::kNewline: return "end of line";
    case TokenKind::kEnd: return "end of input";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t col = 1;
  int depth = 0;

  auto push = [&](TokenKind kind, std::string text, SourcePos pos) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.pos = pos;
    out.push_back(std::move(t));
  };
  auto advance = [&](std::size_t n) {
    i += n;
    col += n;
  };

  while (i < src.size()) {
    const char c = src[i];
    const SourcePos pos{line, col};
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (c == '\n') {
      if (depth == 0 && !out.empty() && out.back().kind != TokenKind::kNewline) {
        push(TokenKind::kNewline, "\n", pos);
      }
      ++i;
      ++line;
      col = 1;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      push(TokenKind::kIdent, std::string(src.substr(i, j - i)), pos);
      advance(j - i);
    } else if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      if (j < src.size() && is_ident_start(src[j])) {
        throw ParseError("malformed number", pos.line, pos.column);
      }
      double value = 0.0;
      const char* first = src.data() + i;
      const char* last = src.data() + j;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError("number out of range", pos.line, pos.column);
      }
      Token t;
      t.kind = TokenKind::kNumber;
      t.text = std::string(src.substr(i, j - i));
      t.number = value;
      t.pos = pos;
      out.push_back(std::move(t));
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') {
        throw ParseError("unterminated string", pos.line, pos.column);
      }
      const std::string_view text = src.substr(i + 1, j - i - 1);
      if (!valid_utf8(text)) throw ParseError("string is not valid UTF-8", pos.line, pos.column);
      push(TokenKind::kString, std::string(text), pos);
      advance(j + 1 - i);
    } else {
      const char n = i + 1 < src.size() ? src[i + 1] : '\0';
      switch (c) {
        case '(':
          ++depth;
          push(TokenKind::kLParen, "(", pos);
          advance(1);
          break;
        case ')':
          if (depth > 0) --depth;
          push(TokenKind::kRParen, ")", pos);
          advance(1);
          break;
        case ',': push(TokenKind::kComma, ",", pos); advance(1); break;
        case '+': push(TokenKind::kPlus, "+", pos); advance(1); break;
        case '-': push(TokenKind::kMinus, "-", pos); advance(1); break;
        case '*': push(TokenKind::kStar, "*", pos); advance(1); break;
        case '/': push(TokenKind::kSlash, "/", pos); advance(1); break;
        case '<':
          if (n == '=') { push(TokenKind::kLessEq, "<=", pos); advance(2); }
          else { push(TokenKind::kLess, "<", pos); advance(1); }
          break;
        case '>':
          if (n == '=') { push(TokenKind::kGreaterEq, ">=", pos); advance(2); }
          else { push(TokenKind::kGreater, ">", pos); advance(1); }
          break;
        case '=':
          if (n == '=') { push(TokenKind::kEqEq, "==", pos); advance(2); }
          else { push(TokenKind::kAssign, "=", pos); advance(1); }
          break;
        case '!':
          if (n == '=') { push(TokenKind::kNotEq, "!=", pos); advance(2); break; }
          [[fallthrough]];
        default: {
          const unsigned char uc = static_cast<unsigned char>(c);
          char shown[16];
          if (uc >= 0x20 && uc < 0x7f) {
            std::snprintf(shown, sizeof shown, "'%c'", c);
          } else {
            std::snprintf(shown, sizeof shown, "byte 0x%02x", uc);
          }
          throw ParseError(std::string("unexpected character ") + shown, pos.line, pos.column);
        }
      }
    }
  }
  if (!out.empty() && out.back().kind != TokenKind::kNewline) {
    push(TokenKind::kNewline, "\n", SourcePos{line, col});
  }
  push(TokenKind::kEnd, "", SourcePos{line, col});
  return out;
}

}  // namespace bpt::lang
