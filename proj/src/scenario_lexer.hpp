#ifndef BPT_SRC_SCENARIO_LEXER_HPP_
#define BPT_SRC_SCENARIO_LEXER_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "bpt/scenario_lang.hpp"

namespace bpt::lang {

enum class TokenKind {
  kIdent,
  kNumber,
  kString,
  kLParen,
  kRParen,
  kComma,
  kAssign,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kLess,
  kLessEq,
  kGreater,
  kGreaterEq,
  kEqEq,
  kNotEq,
  kNewline,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

const char* describe(TokenKind kind);

/// Newlines inside parentheses are dropped so calls may span lines.
std::vector<Token> tokenize(std::string_view source);

}  // namespace bpt::lang

#endif  // BPT_SRC_SCENARIO_LEXER_HPP_
