#include <chrono>
#include <random>

#include "doctest.h"
#include "support/support.hpp"
#include "xanim/oal/parser.hpp"
#include "xanim/oal/token.hpp"

using namespace xanim;
using namespace xanim::oal;

namespace {

MethodAst parse_ok(std::string_view src) {
  auto r = parse_method_body(src);
  if (!r.ok())
    for (const auto& d : r.diagnostics) MESSAGE(to_string(d));
  REQUIRE(r.ok());
  return std::move(*r.ast);
}

template <class T>
const T& node(const Stmt& s) {
  REQUIRE(std::holds_alternative<T>(s.node));
  return std::get<T>(s.node);
}

template <class T>
const T& enode(const Expr& e) {
  REQUIRE(std::holds_alternative<T>(e.node));
  return std::get<T>(e.node);
}

// Round trip: parse, print, parse again; the second print must be a fixed point.
void check_round_trip(std::string_view src) {
  auto first = parse_method_body(src);
  if (!first.ok()) return;
  auto printed = pretty_print(*first.ast);
  auto second = parse_method_body(printed);
  if (!second.ok()) {
    for (const auto& d : second.diagnostics) MESSAGE(to_string(d));
    MESSAGE("source:\n" << src << "\nprinted:\n" << printed);
  }
  REQUIRE(second.ok());
  CHECK(same_structure(*first.ast, *second.ast));
  CHECK(pretty_print(*second.ast) == printed);
}

}  // namespace

TEST_SUITE("oal") {
  TEST_CASE("tokenize create statement") {
    auto r = tokenize("create object instance r of Ranger;");
    REQUIRE(r.ok());
    REQUIRE(r.tokens.size() == 7);
    std::vector<TokenKind> kinds;
    for (const auto& t : r.tokens) kinds.push_back(t.kind);
    CHECK(kinds == std::vector<TokenKind>{TokenKind::Keyword, TokenKind::Keyword, TokenKind::Keyword, TokenKind::Identifier,
                                          TokenKind::Keyword, TokenKind::Identifier, TokenKind::Semicolon});
  }

  TEST_CASE("string escapes") {
    auto r = tokenize(R"(x = "a\"b";)");
    REQUIRE(r.ok());
    REQUIRE(r.tokens.size() == 4);
    CHECK(r.tokens[2].kind == TokenKind::String);
    CHECK(r.tokens[2].value == "a\"b");
    auto r2 = tokenize(R"("back\\slash")");
    REQUIRE(r2.ok());
    CHECK(r2.tokens[0].value == "back\\slash");
  }

  TEST_CASE("illegal character") {
    auto r = tokenize("@");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].span.line == 1);
    CHECK(r.diagnostics[0].span.col_start == 0);
    CHECK(r.diagnostics[0].message.find("illegal") != std::string::npos);
  }

  TEST_CASE("unterminated string") {
    auto r = tokenize("x = \"abc");
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics[0].message.find("unterminated") != std::string::npos);
  }

  TEST_CASE("lexical classes") {
    auto r = tokenize("12 3.25 R7 Rx -> != <= >= == // tail\nnot_empty _a");
    REQUIRE(r.ok());
    std::vector<TokenKind> kinds;
    for (const auto& t : r.tokens) kinds.push_back(t.kind);
    CHECK(kinds == std::vector<TokenKind>{TokenKind::Integer, TokenKind::Real, TokenKind::RelationId, TokenKind::Identifier,
                                          TokenKind::Arrow, TokenKind::NotEqual, TokenKind::LessEqual,
                                          TokenKind::GreaterEqual, TokenKind::Equal, TokenKind::Keyword,
                                          TokenKind::Identifier});
    CHECK(r.tokens.back().span.line == 2);
  }

  TEST_CASE("token spans are ordered and disjoint") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      auto src = xt::random_body_source(rng);
      auto r = tokenize(src);
      for (std::size_t k = 1; k < r.tokens.size(); ++k) {
        const auto& a = r.tokens[k - 1].span;
        const auto& b = r.tokens[k].span;
        CHECK((a.line < b.line || (a.line == b.line && a.col_end <= b.col_start)));
      }
    }
  }

  TEST_CASE("parse create") {
    auto ast = parse_ok("create object instance r of Ranger;");
    REQUIRE(ast.statements.size() == 1);
    const auto& c = node<Create>(ast.statements[0]);
    CHECK(c.var == "r");
    CHECK(c.class_name == "Ranger");
  }

  TEST_CASE("parse if") {
    auto ast = parse_ok("if (x < 3) x = x + 1; end if;");
    REQUIRE(ast.statements.size() == 1);
    const auto& s = node<If>(ast.statements[0]);
    REQUIRE(s.arms.size() == 1);
    CHECK_FALSE(s.has_else);
    const auto& cond = enode<Binary>(s.arms[0].cond);
    CHECK(cond.op == BinaryOp::Lt);
    CHECK(enode<VarRef>(*cond.lhs).name == "x");
    CHECK(enode<IntLit>(*cond.rhs).value == 3);
    REQUIRE(s.arms[0].body.size() == 1);
    const auto& a = node<Assign>(s.arms[0].body[0]);
    CHECK(a.target.base.name == "x");
    CHECK_FALSE(a.target.attr);
    CHECK(enode<Binary>(a.value).op == BinaryOp::Add);
  }

  TEST_CASE("parse select with where") {
    auto ast = parse_ok("select any d from instances of Dog where (selected.age > 2);");
    const auto& s = node<SelectInstances>(ast.statements[0]);
    CHECK(s.mode == SelectMode::Any);
    CHECK(s.var == "d");
    CHECK(s.class_name == "Dog");
    REQUIRE(s.where);
    const auto& b = enode<Binary>(*s.where);
    CHECK(b.op == BinaryOp::Gt);
    const auto& acc = enode<AttrAccess>(*b.lhs);
    CHECK(acc.attr == "age");
    CHECK(std::holds_alternative<SelectedRef>(acc.receiver->node));
  }

  TEST_CASE("navigation chain and calls") {
    auto ast = parse_ok("select many o related by s->Observer[R1]->Dog[R22];\nRegistry.Count(1, \"a\");\nassign y = self.F();");
    const auto& sr = node<SelectRelated>(ast.statements[0]);
    CHECK(sr.mode == SelectMode::Many);
    REQUIRE(sr.chain.size() == 2);
    CHECK(sr.chain[1].relation == "R22");
    const auto& call = enode<Call>(node<CallStmt>(ast.statements[1]).call);
    CHECK(call.receiver.name == "Registry");
    CHECK(call.args.size() == 2);
    const auto& a = node<Assign>(ast.statements[2]);
    CHECK(enode<Call>(a.value).receiver.is_self);
  }

  TEST_CASE("precedence") {
    auto e = parse_expression("not a or b and c == 1 + 2 * -x");
    REQUIRE(e.expr);
    CHECK(pretty_print(*e.expr) == "not a or b and c == 1 + 2 * -x");
    const auto& top = enode<Binary>(*e.expr);
    CHECK(top.op == BinaryOp::Or);
    CHECK(std::holds_alternative<Unary>(top.lhs->node));
  }

  TEST_CASE("comparisons do not chain") {
    CHECK_FALSE(parse_method_body("x = a < b < c;").ok());
    CHECK(parse_method_body("x = (a < b) == c;").ok());
  }

  TEST_CASE("error recovery reports several mistakes") {
    auto r = parse_method_body("x = ;\ny = 1;\ncreate object r of X;\nz = 2;\nrelate a b across R1;");
    CHECK_FALSE(r.ok());
    CHECK(r.diagnostics.size() >= 3);
    for (const auto& d : r.diagnostics) CHECK(d.span.line >= 1);
  }

  TEST_CASE("pretty print basics") {
    MethodAst ret;
    ret.statements.push_back(Stmt{{}, Return{}});
    CHECK(pretty_print(ret) == "return;\n");
    CHECK(pretty_print(parse_ok("create   object instance r of Ranger ;")) == "create object instance r of Ranger;\n");
  }

  TEST_CASE("nested blocks indent by four") {
    auto text = pretty_print(parse_ok("while (i < 3) if (i == 1) x = 1; end if; i = i + 1; end while;"));
    CHECK(text ==
          "while (i < 3)\n"
          "    if (i == 1)\n"
          "        x = 1;\n"
          "    end if;\n"
          "    i = i + 1;\n"
          "end while;\n");
  }

  TEST_CASE("statement spans stay within the source") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
      auto src = xt::random_body_source(rng);
      auto r = parse_method_body(src);
      if (!r.ok()) continue;
      int lines = 1 + static_cast<int>(std::count(src.begin(), src.end(), '\n'));
      std::function<void(const Block&)> walk = [&](const Block& b) {
        for (const auto& s : b) {
          CHECK(s.span.line >= 1);
          CHECK(s.span.line <= lines);
          std::visit(
              [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, If>) {
                  for (const auto& arm : n.arms) walk(arm.body);
                  walk(n.else_body);
                } else if constexpr (std::is_same_v<T, While> || std::is_same_v<T, ForEach>) {
                  walk(n.body);
                }
              },
              s.node);
        }
      };
      walk(r.ast->statements);
    }
  }

  TEST_CASE("round trip on the fixture corpus") {
    int bodies = 0;
    for (const auto& f : xt::load_fixtures()) {
      auto bundle = load_method_bundle(f.methods_text);
      for (const auto& e : bundle.entries) {
        check_round_trip(e.code);
        ++bodies;
      }
    }
    CHECK(bodies >= 20);
  }

  TEST_CASE("round trip on 1000 generated ASTs") {
    std::mt19937_64 rng(20240601);
    int parsed = 0, attempts = 0;
    while (parsed < 1000 && attempts < 20000) {
      ++attempts;
      auto src = xt::random_body_source(rng);
      if (!parse_method_body(src).ok()) continue;
      check_round_trip(src);
      ++parsed;
    }
    CHECK(parsed == 1000);
  }

  TEST_CASE("round trip on generated runnable programs") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      auto prog = xt::random_program(seed);
      for (const auto& e : load_method_bundle(prog.methods_json).entries) {
        REQUIRE(parse_method_body(e.code).ok());
        check_round_trip(e.code);
      }
    }
  }

  TEST_CASE("fuzz tokenize and parse with 64 KiB inputs") {
    using clock = std::chrono::steady_clock;
    std::mt19937_64 rng(99);
    const std::size_t size = 64 * 1024;
    auto budget = std::chrono::seconds(10);

    auto run_class = [&](const char* label, auto make) {
      auto start = clock::now();
      int inputs = 0;
      for (int i = 0; i < 16; ++i) {
        std::string s = make();
        auto t0 = clock::now();
        auto toks = tokenize(s);
        auto r = parse_method_body(s);
        auto dt = clock::now() - t0;
        CHECK(dt < budget);
        (void)toks;
        (void)r;
        ++inputs;
        if (clock::now() - start > budget) break;
      }
      MESSAGE(label << ": " << inputs << " inputs");
      CHECK(clock::now() - start < budget * 2);
    };

    run_class("random bytes", [&] {
      std::string s(size, '\0');
      for (auto& c : s) c = static_cast<char>(rng() & 0xff);
      return s;
    });
    run_class("printable ascii", [&] {
      std::string s(size, ' ');
      for (auto& c : s) c = static_cast<char>(32 + rng() % 95);
      return s;
    });
    static const std::vector<std::string> pieces = {"if", "(", ")", "end", "while", "for", "each", "in", ";", "x",
                                                    "=", "+", "\"", "select", "any", "->", "[", "R1", "]", ".",
                                                    "not", "-", "1.5", " ", "\n", "elif", "else", "create", "of"};
    run_class("token soup", [&] {
      std::string s;
      while (s.size() < size) s += pieces[rng() % pieces.size()] + " ";
      s.resize(size);
      return s;
    });
    run_class("deep nesting", [&] {
      std::string s;
      while (s.size() < size / 2) s += rng() % 2 ? "(" : "if (x) ";
      while (s.size() < size) s += rng() % 2 ? ")" : "end if;";
      return s;
    });
  }
}
