#include "xanim/oal/parser.hpp"

#include <charconv>
#include <cmath>

#include "xanim/oal/token.hpp"

namespace xanim::oal {

namespace {

struct SyntaxError {
  Diagnostic diag;
};

struct NestingExceeded {
  SourceSpan span;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {
    Token end;
    end.kind = TokenKind::End;
    if (!toks_.empty()) {
      const auto& last = toks_.back().span;
      end.span = {last.line, last.col_end, last.col_end};
    } else {
      end.span = {1, 0, 0};
    }
    toks_.push_back(std::move(end));
  }

  ParseResult parse_body() {
    ParseResult out;
    MethodAst ast;
    try {
      ast.statements = parse_statements(/*nested=*/false);
    } catch (const NestingExceeded& e) {
      diags_.push_back(error_at("nesting deeper than " + std::to_string(kMaxNesting) + " levels", e.span));
    }
    out.diagnostics = std::move(diags_);
    if (out.diagnostics.empty()) out.ast = std::move(ast);
    return out;
  }

  ExprParseResult parse_lone_expression() {
    ExprParseResult out;
    try {
      Expr e = parse_expr();
      if (!check(TokenKind::End)) fail("end of expression");
      out.expr = std::move(e);
    } catch (const SyntaxError& e) {
      out.diagnostics.push_back(e.diag);
    } catch (const NestingExceeded& e) {
      out.diagnostics.push_back(error_at("expression nested too deeply", e.span));
    }
    return out;
  }

 private:
  class DepthGuard {
   public:
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxNesting) throw NestingExceeded{p_.peek().span};
    }
    ~DepthGuard() { --p_.depth_; }
    DepthGuard(const DepthGuard&) = delete;
    DepthGuard& operator=(const DepthGuard&) = delete;

   private:
    Parser& p_;
  };

  // ---- token access -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }

  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  bool check(TokenKind k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
  bool check_kw(std::string_view kw, std::size_t ahead = 0) const { return peek(ahead).is_keyword(kw); }

  bool accept(TokenKind k) {
    if (!check(k)) return false;
    advance();
    return true;
  }

  bool accept_kw(std::string_view kw) {
    if (!check_kw(kw)) return false;
    advance();
    return true;
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    return "'" + t.text + "'";
  }

  [[noreturn]] void fail(std::string_view expected) const {
    const Token& t = peek();
    throw SyntaxError{error_at("expected " + std::string(expected) + " but found " + describe(t), t.span)};
  }

  const Token& expect(TokenKind k) {
    if (!check(k)) fail(token_kind_name(k));
    return advance();
  }

  void expect_kw(std::string_view kw) {
    if (!check_kw(kw)) fail("'" + std::string(kw) + "'");
    advance();
  }

  std::string expect_ident(std::string_view role) {
    if (!check(TokenKind::Identifier)) fail(role);
    return advance().text;
  }

  /// Span from token `first` to the last token before pos_ that sits on the
  /// same line as `first`.
  SourceSpan span_from(std::size_t first) const {
    const auto& start = toks_[first].span;
    SourceSpan s = start;
    for (std::size_t i = first; i < pos_ && i < toks_.size(); ++i) {
      if (toks_[i].span.line != start.line) break;
      s.col_end = toks_[i].span.col_end;
    }
    return s;
  }

  void synchronize() {
    while (!check(TokenKind::End)) {
      if (advance().kind == TokenKind::Semicolon) return;
    }
  }

  // ---- statements ---------------------------------------------------------

  Block parse_statements(bool nested) {
    Block out;
    while (!check(TokenKind::End)) {
      if (nested && (check_kw("end") || check_kw("elif") || check_kw("else"))) break;
      try {
        out.push_back(parse_statement());
      } catch (const SyntaxError& e) {
        diags_.push_back(e.diag);
        synchronize();
      }
    }
    return out;
  }

  Stmt make(std::size_t first, Stmt::Node node) const { return Stmt{span_from(first), std::move(node)}; }

  Stmt parse_statement() {
    const Token& t = peek();
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "create") return parse_create();
      if (t.text == "delete") return parse_delete();
      if (t.text == "assign") return parse_assign_or_call(/*explicit_assign=*/true);
      if (t.text == "select") return parse_select();
      if (t.text == "relate") return parse_relate();
      if (t.text == "unrelate") return parse_unrelate();
      if (t.text == "if") return parse_if();
      if (t.text == "while") return parse_while();
      if (t.text == "for") return parse_for();
      if (t.text == "return") return parse_return();
      if (t.text == "self") return parse_assign_or_call(false);
    }
    if (t.kind == TokenKind::Identifier) return parse_assign_or_call(false);
    fail("statement");
  }

  Stmt parse_create() {
    std::size_t first = pos_;
    expect_kw("create");
    expect_kw("object");
    expect_kw("instance");
    Create c;
    c.var = expect_ident("variable name");
    expect_kw("of");
    c.class_name = expect_ident("class name");
    expect(TokenKind::Semicolon);
    return make(first, std::move(c));
  }

  Stmt parse_delete() {
    std::size_t first = pos_;
    expect_kw("delete");
    expect_kw("object");
    expect_kw("instance");
    Delete d{expect_ident("variable name")};
    expect(TokenKind::Semicolon);
    return make(first, std::move(d));
  }

  NameOrSelf parse_name_or_self() {
    if (accept_kw("self")) return {true, {}};
    return {false, expect_ident("variable name or 'self'")};
  }

  Stmt parse_assign_or_call(bool explicit_assign) {
    std::size_t first = pos_;
    if (explicit_assign) expect_kw("assign");
    std::size_t base_pos = pos_;
    NameOrSelf base = parse_name_or_self();
    LValue target{base, std::nullopt};
    if (accept(TokenKind::Dot)) {
      std::string member = expect_ident("attribute or method name");
      if (check(TokenKind::LParen)) {
        if (explicit_assign) fail("'='");
        Call call{base, member, parse_args()};
        Expr e{span_from(base_pos), std::move(call)};
        expect(TokenKind::Semicolon);
        return make(first, CallStmt{std::move(e)});
      }
      target.attr = std::move(member);
    } else if (base.is_self) {
      fail("'.' after 'self'");
    }
    expect(TokenKind::Assign);
    Expr value = parse_expr();
    expect(TokenKind::Semicolon);
    return make(first, Assign{std::move(target), std::move(value)});
  }

  Stmt parse_select() {
    std::size_t first = pos_;
    expect_kw("select");
    SelectMode mode;
    if (accept_kw("one"))
      mode = SelectMode::One;
    else if (accept_kw("any"))
      mode = SelectMode::Any;
    else if (accept_kw("many"))
      mode = SelectMode::Many;
    else
      fail("'one', 'any' or 'many'");
    std::string var = expect_ident("variable name");
    if (mode != SelectMode::One && accept_kw("from")) {
      expect_kw("instances");
      expect_kw("of");
      SelectInstances s{mode, std::move(var), expect_ident("class name"), std::nullopt};
      if (accept_kw("where")) {
        expect(TokenKind::LParen);
        s.where = parse_expr();
        expect(TokenKind::RParen);
      }
      expect(TokenKind::Semicolon);
      return make(first, std::move(s));
    }
    if (!check_kw("related")) fail(mode == SelectMode::One ? "'related'" : "'from' or 'related'");
    advance();
    expect_kw("by");
    SelectRelated s{mode, std::move(var), expect_ident("start variable"), {}};
    do {
      expect(TokenKind::Arrow);
      NavStep step;
      step.class_name = expect_ident("class name");
      expect(TokenKind::LBracket);
      step.relation = expect(TokenKind::RelationId).text;
      expect(TokenKind::RBracket);
      s.chain.push_back(std::move(step));
    } while (check(TokenKind::Arrow));
    expect(TokenKind::Semicolon);
    return make(first, std::move(s));
  }

  Stmt parse_relate() {
    std::size_t first = pos_;
    expect_kw("relate");
    Relate r;
    r.a = expect_ident("variable name");
    expect_kw("to");
    r.b = expect_ident("variable name");
    expect_kw("across");
    r.relation = expect(TokenKind::RelationId).text;
    expect(TokenKind::Semicolon);
    return make(first, std::move(r));
  }

  Stmt parse_unrelate() {
    std::size_t first = pos_;
    expect_kw("unrelate");
    Unrelate r;
    r.a = expect_ident("variable name");
    expect_kw("from");
    r.b = expect_ident("variable name");
    expect_kw("across");
    r.relation = expect(TokenKind::RelationId).text;
    expect(TokenKind::Semicolon);
    return make(first, std::move(r));
  }

  Expr parse_condition() {
    expect(TokenKind::LParen);
    Expr e = parse_expr();
    expect(TokenKind::RParen);
    return e;
  }

  void expect_end(std::string_view what) {
    expect_kw("end");
    expect_kw(what);
    expect(TokenKind::Semicolon);
  }

  Stmt parse_if() {
    DepthGuard guard(*this);
    std::size_t first = pos_;
    expect_kw("if");
    If node;
    Expr cond = parse_condition();
    SourceSpan header = span_from(first);
    node.arms.push_back({std::move(cond), parse_statements(true)});
    while (accept_kw("elif")) {
      Expr c = parse_condition();
      node.arms.push_back({std::move(c), parse_statements(true)});
    }
    if (accept_kw("else")) {
      node.has_else = true;
      node.else_body = parse_statements(true);
    }
    expect_end("if");
    return Stmt{header, std::move(node)};
  }

  Stmt parse_while() {
    DepthGuard guard(*this);
    std::size_t first = pos_;
    expect_kw("while");
    Expr cond = parse_condition();
    SourceSpan header = span_from(first);
    Block body = parse_statements(true);
    expect_end("while");
    return Stmt{header, While{std::move(cond), std::move(body)}};
  }

  Stmt parse_for() {
    DepthGuard guard(*this);
    std::size_t first = pos_;
    expect_kw("for");
    expect_kw("each");
    ForEach f;
    f.var = expect_ident("loop variable");
    expect_kw("in");
    f.set_var = expect_ident("set variable");
    SourceSpan header = span_from(first);
    f.body = parse_statements(true);
    expect_end("for");
    return Stmt{header, std::move(f)};
  }

  Stmt parse_return() {
    std::size_t first = pos_;
    expect_kw("return");
    Return r;
    if (!check(TokenKind::Semicolon)) r.value = parse_expr();
    expect(TokenKind::Semicolon);
    return make(first, std::move(r));
  }

  // ---- expressions --------------------------------------------------------

  Expr node_from(std::size_t first, Expr::Node node) const { return Expr{span_from(first), std::move(node)}; }

  Expr parse_expr() {
    DepthGuard guard(*this);
    return parse_or();
  }

  Expr parse_or() {
    std::size_t first = pos_;
    Expr lhs = parse_and();
    while (accept_kw("or")) {
      Expr rhs = parse_and();
      lhs = node_from(first, Binary{BinaryOp::Or, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_and() {
    std::size_t first = pos_;
    Expr lhs = parse_not();
    while (accept_kw("and")) {
      Expr rhs = parse_not();
      lhs = node_from(first, Binary{BinaryOp::And, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_not() {
    if (!check_kw("not")) return parse_comparison();
    DepthGuard guard(*this);
    std::size_t first = pos_;
    advance();
    Expr operand = parse_not();
    return node_from(first, Unary{UnaryOp::Not, std::move(operand)});
  }

  std::optional<BinaryOp> comparison_op() const {
    switch (peek().kind) {
      case TokenKind::Equal: return BinaryOp::Eq;
      case TokenKind::NotEqual: return BinaryOp::Ne;
      case TokenKind::Less: return BinaryOp::Lt;
      case TokenKind::LessEqual: return BinaryOp::Le;
      case TokenKind::Greater: return BinaryOp::Gt;
      case TokenKind::GreaterEqual: return BinaryOp::Ge;
      default: return std::nullopt;
    }
  }

  Expr parse_comparison() {
    std::size_t first = pos_;
    Expr lhs = parse_additive();
    auto op = comparison_op();
    if (!op) return lhs;
    advance();
    Expr rhs = parse_additive();
    if (comparison_op()) {
      const Token& t = peek();
      throw SyntaxError{error_at("comparison operators are non-associative; parenthesize " + describe(t), t.span)};
    }
    return node_from(first, Binary{*op, std::move(lhs), std::move(rhs)});
  }

  Expr parse_additive() {
    std::size_t first = pos_;
    Expr lhs = parse_multiplicative();
    while (check(TokenKind::Plus) || check(TokenKind::Minus)) {
      BinaryOp op = advance().kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
      Expr rhs = parse_multiplicative();
      lhs = node_from(first, Binary{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_multiplicative() {
    std::size_t first = pos_;
    Expr lhs = parse_unary();
    while (check(TokenKind::Star) || check(TokenKind::Slash)) {
      BinaryOp op = advance().kind == TokenKind::Star ? BinaryOp::Mul : BinaryOp::Div;
      Expr rhs = parse_unary();
      lhs = node_from(first, Binary{op, std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_unary() {
    std::optional<UnaryOp> op;
    if (check(TokenKind::Minus))
      op = UnaryOp::Neg;
    else if (check_kw("cardinality"))
      op = UnaryOp::Cardinality;
    else if (check_kw("empty"))
      op = UnaryOp::Empty;
    else if (check_kw("not_empty"))
      op = UnaryOp::NotEmpty;
    if (!op) return parse_postfix();
    DepthGuard guard(*this);
    std::size_t first = pos_;
    advance();
    Expr operand = parse_unary();
    return node_from(first, Unary{*op, std::move(operand)});
  }

  Expr parse_postfix() {
    std::size_t first = pos_;
    Expr e = parse_primary();
    while (check(TokenKind::Dot)) {
      if (check(TokenKind::Identifier, 1) && check(TokenKind::LParen, 2)) {
        const Token& t = peek(1);
        throw SyntaxError{error_at("call receiver must be a variable, a class name or 'self'", t.span)};
      }
      advance();
      std::string attr = expect_ident("attribute name");
      e = node_from(first, AttrAccess{std::move(e), std::move(attr)});
    }
    return e;
  }

  std::vector<Expr> parse_args() {
    expect(TokenKind::LParen);
    std::vector<Expr> args;
    if (!check(TokenKind::RParen)) {
      do {
        args.push_back(parse_expr());
      } while (accept(TokenKind::Comma));
    }
    expect(TokenKind::RParen);
    return args;
  }

  bool at_call() const {
    return check(TokenKind::Dot, 1) && check(TokenKind::Identifier, 2) && check(TokenKind::LParen, 3);
  }

  Expr parse_call(std::size_t first, NameOrSelf receiver) {
    advance();  // '.'
    std::string method = advance().text;
    Call c{std::move(receiver), std::move(method), parse_args()};
    return node_from(first, std::move(c));
  }

  Expr parse_primary() {
    std::size_t first = pos_;
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Integer: {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
          throw SyntaxError{error_at("integer literal out of range", t.span)};
        advance();
        return node_from(first, IntLit{v});
      }
      case TokenKind::Real: {
        double v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || !std::isfinite(v))
          throw SyntaxError{error_at("real literal out of range", t.span)};
        advance();
        return node_from(first, RealLit{v});
      }
      case TokenKind::String: {
        std::string v = t.value;
        advance();
        return node_from(first, StringLit{std::move(v)});
      }
      case TokenKind::Identifier: {
        if (at_call()) {
          std::string name = advance().text;
          return parse_call(first, NameOrSelf{false, std::move(name)});
        }
        std::string name = advance().text;
        return node_from(first, VarRef{std::move(name)});
      }
      case TokenKind::LParen: {
        DepthGuard guard(*this);
        advance();
        Expr inner = parse_expr();
        expect(TokenKind::RParen);
        return inner;
      }
      case TokenKind::Keyword:
        if (t.text == "true" || t.text == "false") {
          bool v = t.text == "true";
          advance();
          return node_from(first, BoolLit{v});
        }
        if (t.text == "none") {
          advance();
          return node_from(first, NoneLit{});
        }
        if (t.text == "selected") {
          advance();
          return node_from(first, SelectedRef{});
        }
        if (t.text == "self") {
          if (at_call()) {
            advance();
            return parse_call(first, NameOrSelf{true, {}});
          }
          advance();
          return node_from(first, SelfRef{});
        }
        break;
      default: break;
    }
    fail("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<Diagnostic> diags_;
};

}  // namespace

ParseResult parse_method_body(std::string_view source) {
  auto lexed = tokenize(source);
  if (!lexed.ok()) return ParseResult{std::nullopt, std::move(lexed.diagnostics)};
  return Parser(std::move(lexed.tokens)).parse_body();
}

ExprParseResult parse_expression(std::string_view source) {
  auto lexed = tokenize(source);
  if (!lexed.ok()) return ExprParseResult{std::nullopt, std::move(lexed.diagnostics)};
  return Parser(std::move(lexed.tokens)).parse_lone_expression();
}

}  // namespace xanim::oal
