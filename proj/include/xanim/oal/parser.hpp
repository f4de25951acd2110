#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xanim/diagnostic.hpp"
#include "xanim/oal/ast.hpp"

namespace xanim::oal {

/// Maximum combined nesting of blocks and sub-expressions.
inline constexpr int kMaxNesting = 96;

struct ParseResult {
  std::optional<MethodAst> ast;  // present iff there were no errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return ast.has_value(); }
};

/// Parses a method body. Syntax errors are collected; the parser resumes
/// after the next ';' so one pass reports several independent mistakes.
ParseResult parse_method_body(std::string_view source);

struct ExprParseResult {
  std::optional<Expr> expr;
  std::vector<Diagnostic> diagnostics;
};

/// Parses a standalone expression; the whole input must be consumed.
ExprParseResult parse_expression(std::string_view source);

/// Canonical formatting: one statement per line, four-space indentation.
std::string pretty_print(const MethodAst& ast);
std::string pretty_print(const Expr& e);

}  // namespace xanim::oal
