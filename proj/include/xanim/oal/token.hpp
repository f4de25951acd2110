#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xanim/diagnostic.hpp"

namespace xanim::oal {

enum class TokenKind {
  Keyword,
  Identifier,
  Integer,
  Real,
  String,
  RelationId,
  Semicolon,
  Comma,
  Dot,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Assign,    // =
  Equal,     // ==
  NotEqual,  // !=
  Less,
  LessEqual,
  Greater,
  GreaterEqual,
  Plus,
  Minus,
  Star,
  Slash,
  Arrow,  // ->
  End,    // end of input; never produced by tokenize()
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;   // source slice
  std::string value;  // decoded payload of string literals
  SourceSpan span;

  bool is_keyword(std::string_view kw) const { return kind == TokenKind::Keyword && text == kw; }
};

bool is_keyword(std::string_view word);
std::string_view token_kind_name(TokenKind k);

struct TokenizeResult {
  std::vector<Token> tokens;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Longest-match lexing of an action-language source. Lexing continues past
/// errors so that every bad character is reported.
TokenizeResult tokenize(std::string_view source);

}  // namespace xanim::oal
