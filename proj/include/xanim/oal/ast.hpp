#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xanim/diagnostic.hpp"

namespace xanim::oal {

/// Owning pointer with value semantics (deep copy), used for recursive nodes.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

 private:
  std::unique_ptr<T> ptr_;
};

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnaryOp { Neg, Not, Cardinality, Empty, NotEmpty };

std::string_view binary_op_text(BinaryOp op);
std::string_view unary_op_text(UnaryOp op);

/// A bare name or `self`; used for call receivers and assignment targets.
struct NameOrSelf {
  bool is_self = false;
  std::string name;
};

struct Expr;

struct IntLit {
  std::int64_t value = 0;
};
struct RealLit {
  double value = 0.0;
};
struct StringLit {
  std::string value;
};
struct BoolLit {
  bool value = false;
};
struct NoneLit {};
struct VarRef {
  std::string name;
};
struct SelfRef {};
struct SelectedRef {};
struct AttrAccess {
  Box<Expr> receiver;
  std::string attr;
};
struct Call {
  NameOrSelf receiver;
  std::string method;
  std::vector<Expr> args;
};
struct Binary {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
};
struct Unary {
  UnaryOp op;
  Box<Expr> operand;
};

struct Expr {
  using Node = std::variant<IntLit, RealLit, StringLit, BoolLit, NoneLit, VarRef, SelfRef, SelectedRef,
                            AttrAccess, Call, Binary, Unary>;
  SourceSpan span;
  Node node;
};

struct Stmt;
using Block = std::vector<Stmt>;

enum class SelectMode { One, Any, Many };

struct Create {
  std::string var;
  std::string class_name;
};
struct Delete {
  std::string var;
};
struct LValue {
  NameOrSelf base;
  std::optional<std::string> attr;  // set for `base.attr = ...`
};
struct Assign {
  LValue target;
  Expr value;
};
struct SelectInstances {
  SelectMode mode = SelectMode::Any;  // Any or Many
  std::string var;
  std::string class_name;
  std::optional<Expr> where;
};
struct NavStep {
  std::string class_name;
  std::string relation;
};
struct SelectRelated {
  SelectMode mode = SelectMode::Any;
  std::string var;
  std::string start;
  std::vector<NavStep> chain;
};
struct Relate {
  std::string a;
  std::string b;
  std::string relation;
};
struct Unrelate {
  std::string a;
  std::string b;
  std::string relation;
};
struct IfArm {
  Expr cond;
  Block body;
};
struct If {
  std::vector<IfArm> arms;
  bool has_else = false;
  Block else_body;
};
struct While {
  Expr cond;
  Block body;
};
struct ForEach {
  std::string var;
  std::string set_var;
  Block body;
};
struct Return {
  std::optional<Expr> value;
};
struct CallStmt {
  Expr call;  // always holds a Call node
};

/// One command: the unit of stepping and source highlighting.
struct Stmt {
  using Node = std::variant<Create, Delete, Assign, SelectInstances, SelectRelated, Relate, Unrelate, If,
                            While, ForEach, Return, CallStmt>;
  SourceSpan span;  // header of the command, on its first line
  Node node;
};

struct MethodAst {
  Block statements;
};

/// Structural equality ignoring source spans.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const Block& a, const Block& b);
bool same_structure(const MethodAst& a, const MethodAst& b);

/// Total number of statements, nested blocks included.
std::size_t count_statements(const Block& b);

}  // namespace xanim::oal
