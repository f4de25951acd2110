#include <string>

#include "xanim/json_writer.hpp"
#include "xanim/oal/ast.hpp"
#include "xanim/oal/parser.hpp"

namespace xanim::oal {

std::string_view binary_op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

std::string_view unary_op_text(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Not: return "not";
    case UnaryOp::Cardinality: return "cardinality";
    case UnaryOp::Empty: return "empty";
    case UnaryOp::NotEmpty: return "not_empty";
  }
  return "?";
}

namespace {

// Binding strength, loosest first; mirrors the parser's precedence ladder.
enum Prec { kOr = 1, kAnd, kNot, kCompare, kAdd, kMul, kUnary, kPrimary };

int binary_prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div: return kMul;
    default: return kCompare;
  }
}

int prec_of(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) return binary_prec(b->op);
  if (const auto* u = std::get_if<Unary>(&e.node)) return u->op == UnaryOp::Not ? kNot : kUnary;
  return kPrimary;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string name_or_self(const NameOrSelf& n) { return n.is_self ? "self" : n.name; }

std::string print(const Expr& e, int min_prec);

std::string print_node(const Expr& e) {
  struct Visitor {
    std::string operator()(const IntLit& n) const { return std::to_string(n.value); }
    std::string operator()(const RealLit& n) const { return format_real_fixed(n.value); }
    std::string operator()(const StringLit& n) const { return quote(n.value); }
    std::string operator()(const BoolLit& n) const { return n.value ? "true" : "false"; }
    std::string operator()(const NoneLit&) const { return "none"; }
    std::string operator()(const VarRef& n) const { return n.name; }
    std::string operator()(const SelfRef&) const { return "self"; }
    std::string operator()(const SelectedRef&) const { return "selected"; }
    std::string operator()(const AttrAccess& n) const { return print(*n.receiver, kPrimary) + "." + n.attr; }
    std::string operator()(const Call& n) const {
      std::string out = name_or_self(n.receiver) + "." + n.method + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += print(n.args[i], kOr);
      }
      return out + ")";
    }
    std::string operator()(const Binary& n) const {
      int p = binary_prec(n.op);
      bool assoc = p != kCompare;
      return print(*n.lhs, assoc ? p : p + 1) + " " + std::string(binary_op_text(n.op)) + " " +
             print(*n.rhs, p + 1);
    }
    std::string operator()(const Unary& n) const {
      if (n.op == UnaryOp::Not) return "not " + print(*n.operand, kNot);
      if (n.op == UnaryOp::Neg) return "-" + print(*n.operand, kUnary);
      return std::string(unary_op_text(n.op)) + " " + print(*n.operand, kUnary);
    }
  };
  return std::visit(Visitor{}, e.node);
}

std::string print(const Expr& e, int min_prec) {
  std::string s = print_node(e);
  return prec_of(e) < min_prec ? "(" + s + ")" : s;
}

std::string_view mode_text(SelectMode m) {
  switch (m) {
    case SelectMode::One: return "one";
    case SelectMode::Any: return "any";
    case SelectMode::Many: return "many";
  }
  return "?";
}

class Printer {
 public:
  std::string run(const Block& b) {
    block(b, 0);
    return std::move(out_);
  }

 private:
  void line(int depth, const std::string& text) {
    out_.append(static_cast<std::size_t>(depth) * 4, ' ');
    out_ += text;
    out_ += '\n';
  }

  void block(const Block& b, int depth) {
    for (const auto& s : b) stmt(s, depth);
  }

  void stmt(const Stmt& s, int d) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Create>) {
            line(d, "create object instance " + n.var + " of " + n.class_name + ";");
          } else if constexpr (std::is_same_v<T, Delete>) {
            line(d, "delete object instance " + n.var + ";");
          } else if constexpr (std::is_same_v<T, Assign>) {
            std::string target = name_or_self(n.target.base);
            if (n.target.attr) target += "." + *n.target.attr;
            line(d, target + " = " + print(n.value, kOr) + ";");
          } else if constexpr (std::is_same_v<T, SelectInstances>) {
            std::string text = "select " + std::string(mode_text(n.mode)) + " " + n.var + " from instances of " +
                               n.class_name;
            if (n.where) text += " where (" + print(*n.where, kOr) + ")";
            line(d, text + ";");
          } else if constexpr (std::is_same_v<T, SelectRelated>) {
            std::string text = "select " + std::string(mode_text(n.mode)) + " " + n.var + " related by " + n.start;
            for (const auto& step : n.chain) text += "->" + step.class_name + "[" + step.relation + "]";
            line(d, text + ";");
          } else if constexpr (std::is_same_v<T, Relate>) {
            line(d, "relate " + n.a + " to " + n.b + " across " + n.relation + ";");
          } else if constexpr (std::is_same_v<T, Unrelate>) {
            line(d, "unrelate " + n.a + " from " + n.b + " across " + n.relation + ";");
          } else if constexpr (std::is_same_v<T, If>) {
            for (std::size_t i = 0; i < n.arms.size(); ++i) {
              line(d, std::string(i == 0 ? "if" : "elif") + " (" + print(n.arms[i].cond, kOr) + ")");
              block(n.arms[i].body, d + 1);
            }
            if (n.has_else) {
              line(d, "else");
              block(n.else_body, d + 1);
            }
            line(d, "end if;");
          } else if constexpr (std::is_same_v<T, While>) {
            line(d, "while (" + print(n.cond, kOr) + ")");
            block(n.body, d + 1);
            line(d, "end while;");
          } else if constexpr (std::is_same_v<T, ForEach>) {
            line(d, "for each " + n.var + " in " + n.set_var);
            block(n.body, d + 1);
            line(d, "end for;");
          } else if constexpr (std::is_same_v<T, Return>) {
            line(d, n.value ? "return " + print(*n.value, kOr) + ";" : std::string("return;"));
          } else if constexpr (std::is_same_v<T, CallStmt>) {
            line(d, print(n.call, kOr) + ";");
          }
        },
        s.node);
  }

  std::string out_;
};

bool same_name(const NameOrSelf& a, const NameOrSelf& b) {
  return a.is_self == b.is_self && (a.is_self || a.name == b.name);
}

bool same_opt(const std::optional<Expr>& a, const std::optional<Expr>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_structure(*a, *b);
}

bool same_stmt(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Create>) {
          return x.var == y.var && x.class_name == y.class_name;
        } else if constexpr (std::is_same_v<T, Delete>) {
          return x.var == y.var;
        } else if constexpr (std::is_same_v<T, Assign>) {
          return same_name(x.target.base, y.target.base) && x.target.attr == y.target.attr &&
                 same_structure(x.value, y.value);
        } else if constexpr (std::is_same_v<T, SelectInstances>) {
          return x.mode == y.mode && x.var == y.var && x.class_name == y.class_name && same_opt(x.where, y.where);
        } else if constexpr (std::is_same_v<T, SelectRelated>) {
          if (x.mode != y.mode || x.var != y.var || x.start != y.start || x.chain.size() != y.chain.size())
            return false;
          for (std::size_t i = 0; i < x.chain.size(); ++i)
            if (x.chain[i].class_name != y.chain[i].class_name || x.chain[i].relation != y.chain[i].relation)
              return false;
          return true;
        } else if constexpr (std::is_same_v<T, Relate> || std::is_same_v<T, Unrelate>) {
          return x.a == y.a && x.b == y.b && x.relation == y.relation;
        } else if constexpr (std::is_same_v<T, If>) {
          if (x.arms.size() != y.arms.size() || x.has_else != y.has_else) return false;
          for (std::size_t i = 0; i < x.arms.size(); ++i)
            if (!same_structure(x.arms[i].cond, y.arms[i].cond) || !same_structure(x.arms[i].body, y.arms[i].body))
              return false;
          return same_structure(x.else_body, y.else_body);
        } else if constexpr (std::is_same_v<T, While>) {
          return same_structure(x.cond, y.cond) && same_structure(x.body, y.body);
        } else if constexpr (std::is_same_v<T, ForEach>) {
          return x.var == y.var && x.set_var == y.set_var && same_structure(x.body, y.body);
        } else if constexpr (std::is_same_v<T, Return>) {
          return same_opt(x.value, y.value);
        } else {
          return same_structure(x.call, y.call);
        }
      },
      a.node);
}

}  // namespace

bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, BoolLit> || std::is_same_v<T, StringLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, RealLit>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, AttrAccess>) {
          return x.attr == y.attr && same_structure(*x.receiver, *y.receiver);
        } else if constexpr (std::is_same_v<T, Call>) {
          if (!same_name(x.receiver, y.receiver) || x.method != y.method || x.args.size() != y.args.size())
            return false;
          for (std::size_t i = 0; i < x.args.size(); ++i)
            if (!same_structure(x.args[i], y.args[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && same_structure(*x.lhs, *y.lhs) && same_structure(*x.rhs, *y.rhs);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return x.op == y.op && same_structure(*x.operand, *y.operand);
        } else {
          return true;  // NoneLit, SelfRef, SelectedRef
        }
      },
      a.node);
}

bool same_structure(const Block& a, const Block& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_stmt(a[i], b[i])) return false;
  return true;
}

bool same_structure(const MethodAst& a, const MethodAst& b) { return same_structure(a.statements, b.statements); }

std::size_t count_statements(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b) {
    ++n;
    if (const auto* i = std::get_if<If>(&s.node)) {
      for (const auto& arm : i->arms) n += count_statements(arm.body);
      n += count_statements(i->else_body);
    } else if (const auto* w = std::get_if<While>(&s.node)) {
      n += count_statements(w->body);
    } else if (const auto* f = std::get_if<ForEach>(&s.node)) {
      n += count_statements(f->body);
    }
  }
  return n;
}

std::string pretty_print(const MethodAst& ast) { return Printer().run(ast.statements); }

std::string pretty_print(const Expr& e) { return print(e, kOr); }

}  // namespace xanim::oal
