#include "xanim/codegen.hpp"

#include <algorithm>
#include <sstream>

#include "xanim/json_writer.hpp"
#include "xanim/runtime.hpp"

namespace xanim {

std::string_view codegen_error_kind_name(CodegenErrorKind k) {
  switch (k) {
    case CodegenErrorKind::UnboundBody: return "unbound-body";
    case CodegenErrorKind::InvalidEntry: return "invalid-entry";
    case CodegenErrorKind::ParseErrors: return "parse-errors";
  }
  return "?";
}

namespace {

constexpr const char* kHelperRuntime =
#include "python_runtime.inc"
    ;

const char* const kPythonKeywords[] = {
    "False", "None",  "True",   "_",      "and",   "as",       "assert", "async",  "await",
    "break", "case",  "class",  "continue", "def", "del",      "elif",   "else",   "except",
    "finally", "for", "from",   "global", "if",    "import",   "in",     "is",     "lambda",
    "match", "nonlocal", "not", "or",     "pass",  "raise",    "return", "try",    "while",
    "with",  "yield"};

const char* const kPythonBuiltins[] = {
    "ArithmeticError", "AssertionError", "AttributeError", "BaseException", "BlockingIOError",
    "BrokenPipeError", "BufferError", "BytesWarning", "ChildProcessError", "ConnectionAbortedError",
    "ConnectionError", "ConnectionRefusedError", "ConnectionResetError", "DeprecationWarning", "EOFError",
    "Ellipsis", "EncodingWarning", "EnvironmentError", "Exception", "FileExistsError", "FileNotFoundError",
    "FloatingPointError", "FutureWarning", "GeneratorExit", "IOError", "ImportError", "ImportWarning",
    "IndentationError", "IndexError", "InterruptedError", "IsADirectoryError", "KeyError",
    "KeyboardInterrupt", "LookupError", "MemoryError", "ModuleNotFoundError", "NameError",
    "NotADirectoryError", "NotImplemented", "NotImplementedError", "OSError", "OverflowError",
    "PendingDeprecationWarning", "PermissionError", "ProcessLookupError", "RecursionError",
    "ReferenceError", "ResourceWarning", "RuntimeError", "RuntimeWarning", "StopAsyncIteration",
    "StopIteration", "SyntaxError", "SyntaxWarning", "SystemError", "SystemExit", "TabError",
    "TimeoutError", "TypeError", "UnboundLocalError", "UnicodeDecodeError", "UnicodeEncodeError",
    "UnicodeError", "UnicodeTranslateError", "UnicodeWarning", "UserWarning", "ValueError", "Warning",
    "ZeroDivisionError", "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint",
    "bytearray", "bytes", "callable", "chr", "classmethod", "compile", "complex", "copyright", "credits",
    "delattr", "dict", "dir", "divmod", "enumerate", "eval", "exec", "exit", "filter", "float", "format",
    "frozenset", "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input", "int",
    "isinstance", "issubclass", "iter", "len", "license", "list", "locals", "map", "max", "memoryview",
    "min", "next", "object", "oct", "open", "ord", "pow", "print", "property", "quit", "range", "repr",
    "reversed", "round", "set", "setattr", "slice", "sorted", "staticmethod", "str", "sum", "super",
    "tuple", "type", "vars", "zip", "self"};

const char* const kGlobalNames[] = {
    "argparse", "json", "math", "sys", "threading", "_LINKS", "_RELATIONS", "_REGISTRY", "_CLASSES",
    "_METHODS", "_ATTR_TYPES", "_ENTRY", "_LIVE", "_OAL", "_OAL_VOID", "_OAL_INT_MIN", "_OAL_INT_MAX",
    "_OAL_MAX_STR", "_OAL_MAX_DEPTH", "_OalError", "_OalStartError", "_OalState", "_OalObject", "_OalSet",
    "_OalForeign", "_oal_fail", "_oal_undefined", "_oal_kind", "_oal_tick", "_oal_deref", "_oal_conform",
    "_oal_int", "_oal_real", "_oal_num", "_oal_arith", "_oal_add", "_oal_sub", "_oal_mul", "_oal_div",
    "_oal_cmp", "_oal_bool", "_oal_cond", "_oal_neg", "_oal_not", "_oal_count", "_oal_card", "_oal_empty",
    "_oal_not_empty", "_oal_get", "_oal_set", "_oal_new", "_oal_links_of", "_oal_delete", "_oal_relate",
    "_oal_unrelate", "_oal_pick", "_oal_select", "_oal_related", "_oal_foreach", "_oal_resolve",
    "_oal_dispatch", "_oal_icall", "_oal_scall", "_oal_ret", "_oal_ret_undeclared", "_oal_start",
    "_oal_from_tagged", "_oal_jstr", "_oal_tagged", "__dump_state__", "_oal_main", "_oal_result",
    "_oal_thread"};

const char* const kMemberNames[] = {"_oal_id", "_oal_alive", "_oal_attrs", "_oal_name", "_oal_lineage"};

// `__x__` (special) or `__x` (name-mangled inside class bodies).
bool python_special(const std::string& n) {
  if (n.size() < 2 || n[0] != '_' || n[1] != '_') return false;
  bool dunder = n.size() >= 5 && n.compare(n.size() - 2, 2, "__") == 0 && n[n.size() - 3] != '_';
  bool mangled = n.size() < 4 || n.compare(n.size() - 2, 2, "__") != 0;
  return dunder || mangled;
}

}  // namespace

NameSanitizer::NameSanitizer(std::set<std::string> reserved) : reserved_(std::move(reserved)) {}

NameSanitizer NameSanitizer::for_python_globals() {
  std::set<std::string> r;
  for (const auto* k : kPythonKeywords) r.insert(k);
  for (const auto* b : kPythonBuiltins) r.insert(b);
  for (const auto* g : kGlobalNames) r.insert(g);
  return NameSanitizer(std::move(r));
}

NameSanitizer NameSanitizer::for_python_members() {
  std::set<std::string> r;
  for (const auto* k : kPythonKeywords) r.insert(k);
  for (const auto* m : kMemberNames) r.insert(m);
  return NameSanitizer(std::move(r));
}

bool NameSanitizer::taken(const std::string& name) const {
  return reserved_.count(name) || emitted_.count(name) || python_special(name);
}

std::string NameSanitizer::sanitize(std::string_view name) {
  std::string out(name);
  while (taken(out)) out += '_';
  emitted_.insert(out);
  return out;
}

std::string sanitize_identifier(std::string_view name) { return NameSanitizer::for_python_globals().sanitize(name); }

std::vector<std::string> topo_order_classes(const ClassModel& m) {
  std::vector<std::string> out;
  std::set<std::string> done;
  std::vector<bool> placed(m.classes.size(), false);
  for (std::size_t round = 0; round < m.classes.size(); ++round) {
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
      if (placed[i]) continue;
      auto parent = m.parent_of(m.classes[i].name);
      if (parent && !done.count(*parent)) continue;
      placed[i] = true;
      done.insert(m.classes[i].name);
      out.push_back(m.classes[i].name);
      break;
    }
  }
  return out;
}

namespace {

std::string py_string(std::string_view s) {
  static const char* hex = "0123456789abcdef";
  std::string out = "\"";
  for (unsigned char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c < 0x20 || c == 0x7f) {
      out += "\\x";
      out += hex[c >> 4];
      out += hex[c & 15];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out + "\"";
}

std::string type_spec(const ValueType& t) { return py_string(t.name()); }

class Emitter {
 public:
  Emitter(const FusedModel& f, GenOptions options) : f_(f), m_(f.model), options_(options) {}

  GenUnit run(const std::optional<MethodKey>& entry) {
    if (f_.has_parse_errors()) {
      const auto& d = f_.diagnostics.front();
      throw CodegenError(CodegenErrorKind::ParseErrors, "method " + d.key.class_name + "." + d.key.method +
                                                            " has parse errors: " + to_string(d.diagnostic));
    }
    if (entry) check_entry(*entry);
    auto globals = NameSanitizer::for_python_globals();
    auto order = topo_order_classes(m_);
    GenUnit unit;
    unit.entry = entry;
    for (const auto& c : m_.classes) unit.name_map[c.name] = globals.sanitize(c.name);
    auto members = NameSanitizer::for_python_members();
    for (const auto& c : m_.classes)
      for (const auto& meth : c.methods)
        if (!method_names_.count(meth.name)) method_names_[meth.name] = members.sanitize(meth.name);

    out_ << "#!/usr/bin/env python3\n"
         << "# Generated from an executable UML model. Each translated statement is tagged\n"
         << "# with its source location as `# oal: Class.Method:line`.\n"
         << kHelperRuntime << "\n\n";
    out_ << "_LINKS = {";
    for (std::size_t i = 0; i < m_.relations.size(); ++i) out_ << (i ? ", " : "") << py_string(m_.relations[i].id) << ": []";
    out_ << "}\n";
    out_ << "_RELATIONS = {";
    for (std::size_t i = 0; i < m_.relations.size(); ++i) {
      const auto& r = m_.relations[i];
      out_ << (i ? ", " : "") << py_string(r.id) << ": (" << py_string(relation_kind_name(r.kind)) << ", "
           << py_string(r.from) << ", " << py_string(r.to) << ")";
    }
    out_ << "}\n";
    out_ << "_REGISTRY = {";
    for (std::size_t i = 0; i < m_.classes.size(); ++i) out_ << (i ? ", " : "") << py_string(m_.classes[i].name) << ": []";
    out_ << "}\n";
    out_ << "_ATTR_TYPES = {";
    for (std::size_t i = 0; i < m_.classes.size(); ++i) {
      out_ << (i ? ",\n    " : "\n    ") << py_string(m_.classes[i].name) << ": {";
      auto attrs = m_.all_attributes(m_.classes[i].name);
      for (std::size_t j = 0; j < attrs.size(); ++j)
        out_ << (j ? ", " : "") << py_string(attrs[j].name) << ": " << type_spec(attrs[j].type);
      out_ << "}";
    }
    out_ << (m_.classes.empty() ? "}\n" : ",\n}\n");

    for (const auto& name : order) emit_class(*m_.find_class(name), unit.name_map);

    out_ << "\n\n_CLASSES = {";
    for (std::size_t i = 0; i < m_.classes.size(); ++i)
      out_ << (i ? ", " : "") << py_string(m_.classes[i].name) << ": " << unit.name_map[m_.classes[i].name];
    out_ << "}\n";
    out_ << "_METHODS = {";
    bool first = true;
    for (const auto& c : m_.classes) {
      for (const auto& meth : c.methods) {
        out_ << (first ? "\n    " : ",\n    ") << "(" << py_string(c.name) << ", " << py_string(meth.name) << "): ("
             << py_string(c.name) << ", " << (meth.is_static ? "True" : "False") << ", (";
        for (const auto& p : meth.params) out_ << "(" << py_string(p.name) << ", " << type_spec(p.type) << "), ";
        out_ << "), " << unit.name_map[c.name] << "." << method_names_[meth.name] << ")";
        first = false;
      }
    }
    out_ << (first ? "}\n" : ",\n}\n");
    out_ << "_ENTRY = ";
    if (entry)
      out_ << "(" << py_string(entry->class_name) << ", " << py_string(entry->method) << ")\n";
    else
      out_ << "None\n";
    out_ << "\n\nif __name__ == \"__main__\":\n"
         << "    sys.setrecursionlimit(200000)\n"
         << "    threading.stack_size(256 * 1024 * 1024)\n"
         << "    _oal_result = []\n"
         << "    _oal_thread = threading.Thread(target=lambda: _oal_result.append(_oal_main(_ENTRY)))\n"
         << "    _oal_thread.start()\n"
         << "    _oal_thread.join()\n"
         << "    sys.exit(_oal_result[0] if _oal_result else 1)\n";
    unit.source = out_.str();
    return unit;
  }

 private:
  void check_entry(const MethodKey& e) {
    auto where = e.class_name + "." + e.method;
    if (!m_.find_class(e.class_name)) throw CodegenError(CodegenErrorKind::InvalidEntry, "unknown entry class in " + where);
    auto res = resolve_method(m_, e.class_name, e.method);
    if (!res) throw CodegenError(CodegenErrorKind::InvalidEntry, "unknown entry method " + where);
    const auto* body = f_.body(res->owner, res->method->name);
    if (!body || body->statements.empty())
      throw CodegenError(CodegenErrorKind::InvalidEntry, "entry " + where + " has no commands");
  }

  void line(int indent, const std::string& text) { out_ << std::string(static_cast<std::size_t>(indent) * 4, ' ') << text << "\n"; }

  void emit_class(const ClassDef& c, const std::map<std::string, std::string>& names) {
    auto parent = m_.parent_of(c.name);
    out_ << "\n\nclass " << names.at(c.name) << "(" << (parent ? names.at(*parent) : std::string("_OalObject")) << "):\n";
    line(1, "_oal_name = " + py_string(c.name));
    std::string lineage = "(";
    for (const auto& l : m_.lineage(c.name)) lineage += py_string(l) + ", ";
    line(1, "_oal_lineage = " + lineage + ")");
    out_ << "\n";
    line(1, "def __init__(self):");
    line(2, "super().__init__()");
    for (const auto& a : c.attributes) line(2, "self._oal_attrs[" + py_string(a.name) + "] = " + default_literal(a.type));
    line(2, "_REGISTRY[" + py_string(c.name) + "].append(self)");
    for (const auto& meth : c.methods) emit_method(c, meth);
  }

  static std::string default_literal(const ValueType& t) {
    switch (t.kind) {
      case ValueType::Kind::Integer: return "0";
      case ValueType::Kind::Real: return "0.0";
      case ValueType::Kind::Boolean: return "False";
      case ValueType::Kind::String: return "\"\"";
      case ValueType::Kind::Instance: return "None";
    }
    return "None";
  }

  void emit_method(const ClassDef& c, const MethodDef& meth) {
    out_ << "\n";
    std::string sig = "def " + method_names_.at(meth.name) + "(";
    bool first = true;
    if (meth.is_static) {
      line(1, "@staticmethod");
    } else {
      sig += "self";
      first = false;
    }
    for (const auto& p : meth.params) {
      sig += (first ? "" : ", ") + std::string("v_") + p.name;
      first = false;
    }
    line(1, sig + "):");
    const auto* body = f_.body(c.name, meth.name);
    if (!body) {
      if (!options_.noop_fallback)
        throw CodegenError(CodegenErrorKind::UnboundBody, "method " + c.name + "." + meth.name + " has no bound body");
      line(2, "# no bound body: no-op");
      line(2, "return _OAL_VOID");
      return;
    }
    cls_ = &c;
    meth_ = &meth;
    defined_.clear();
    for (const auto& p : meth.params) defined_.insert(p.name);
    collect_defined(body->statements);
    emit_block(body->statements, 2);
    line(2, "return _OAL_VOID");
  }

  void collect_defined(const oal::Block& b) {
    for (const auto& s : b) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, oal::Create> || std::is_same_v<T, oal::SelectInstances> ||
                          std::is_same_v<T, oal::SelectRelated>) {
              defined_.insert(n.var);
            } else if constexpr (std::is_same_v<T, oal::Assign>) {
              if (!n.target.attr && !n.target.base.is_self) defined_.insert(n.target.base.name);
            } else if constexpr (std::is_same_v<T, oal::ForEach>) {
              defined_.insert(n.var);
              collect_defined(n.body);
            } else if constexpr (std::is_same_v<T, oal::While>) {
              collect_defined(n.body);
            } else if constexpr (std::is_same_v<T, oal::If>) {
              for (const auto& arm : n.arms) collect_defined(arm.body);
              collect_defined(n.else_body);
            }
          },
          s.node);
    }
  }

  std::string where() const { return cls_->name + "." + meth_->name; }

  std::string var(const std::string& name) const {
    if (defined_.count(name)) return "v_" + name;
    return "_oal_undefined(" + py_string(name) + ")";
  }

  std::string self_expr() const { return meth_->is_static ? "None" : "self"; }

  std::string receiver(const oal::NameOrSelf& r) const { return r.is_self ? self_expr() : var(r.name); }

  std::string fail(RuntimeErrorKind k, const std::string& msg) const {
    return "_oal_fail(" + py_string(runtime_error_kind_name(k)) + ", " + py_string(msg) + ")";
  }

  // ---- expressions ---------------------------------------------------------

  std::string expr(const oal::Expr& e) {
    return std::visit([&](const auto& n) { return expr_node(n); }, e.node);
  }

  std::string expr_node(const oal::IntLit& n) { return std::to_string(n.value); }
  std::string expr_node(const oal::RealLit& n) { return format_real(n.value); }
  std::string expr_node(const oal::StringLit& n) { return py_string(n.value); }
  std::string expr_node(const oal::BoolLit& n) { return n.value ? "True" : "False"; }
  std::string expr_node(const oal::NoneLit&) { return "None"; }
  std::string expr_node(const oal::VarRef& n) { return var(n.name); }
  std::string expr_node(const oal::SelfRef&) { return self_expr(); }
  std::string expr_node(const oal::SelectedRef&) {
    return in_where_ ? "_oal_sel" : "_oal_undefined(\"selected\")";
  }
  std::string expr_node(const oal::AttrAccess& n) { return "_oal_get(" + expr(*n.receiver) + ", " + py_string(n.attr) + ")"; }

  std::string expr_node(const oal::Call& n) {
    std::string args = "(";
    for (const auto& a : n.args) args += expr(a) + ", ";
    args += ")";
    if (!n.receiver.is_self && m_.find_class(n.receiver.name))
      return "_oal_scall(" + py_string(n.receiver.name) + ", " + py_string(n.method) + ", " + args + ")";
    return "_oal_icall(" + receiver(n.receiver) + ", " + py_string(n.method) + ", " + args + ")";
  }

  std::string expr_node(const oal::Binary& n) {
    using Op = oal::BinaryOp;
    auto l = expr(*n.lhs);
    auto r = expr(*n.rhs);
    switch (n.op) {
      case Op::And: return "(_oal_bool(" + l + ", \"and\") and _oal_bool(" + r + ", \"and\"))";
      case Op::Or: return "(_oal_bool(" + l + ", \"or\") or _oal_bool(" + r + ", \"or\"))";
      case Op::Add: return "_oal_add(" + l + ", " + r + ")";
      case Op::Sub: return "_oal_sub(" + l + ", " + r + ")";
      case Op::Mul: return "_oal_mul(" + l + ", " + r + ")";
      case Op::Div: return "_oal_div(" + l + ", " + r + ")";
      default: return "_oal_cmp(" + py_string(oal::binary_op_text(n.op)) + ", " + l + ", " + r + ")";
    }
  }

  std::string expr_node(const oal::Unary& n) {
    auto v = expr(*n.operand);
    switch (n.op) {
      case oal::UnaryOp::Neg: return "_oal_neg(" + v + ")";
      case oal::UnaryOp::Not: return "_oal_not(" + v + ")";
      case oal::UnaryOp::Cardinality: return "_oal_card(" + v + ")";
      case oal::UnaryOp::Empty: return "_oal_empty(" + v + ")";
      case oal::UnaryOp::NotEmpty: return "_oal_not_empty(" + v + ")";
    }
    return v;
  }

  // ---- statements ------------------------------------------------------------

  void emit_block(const oal::Block& b, int indent) {
    if (b.empty()) {
      line(indent, "pass");
      return;
    }
    for (const auto& s : b) {
      line(indent, "# oal: " + where() + ":" + std::to_string(s.span.line));
      std::visit([&](const auto& n) { stmt(s, n, indent); }, s.node);
    }
  }

  std::string tick(const oal::Stmt& s) const { return "_oal_tick(" + std::to_string(s.span.line) + ")"; }

  void stmt(const oal::Stmt& s, const oal::Create& n, int ind) {
    line(ind, tick(s));
    if (!m_.find_class(n.class_name))
      line(ind, fail(RuntimeErrorKind::UnknownClass, "unknown class " + n.class_name));
    else
      line(ind, "v_" + n.var + " = _oal_new(" + py_string(n.class_name) + ")");
  }

  void stmt(const oal::Stmt& s, const oal::Delete& n, int ind) {
    line(ind, tick(s));
    line(ind, "_oal_delete(" + var(n.var) + ", " + py_string(n.var) + ")");
  }

  void stmt(const oal::Stmt& s, const oal::Assign& n, int ind) {
    line(ind, tick(s));
    auto value = expr(n.value);
    const auto& t = n.target;
    if (!t.attr) {
      if (t.base.is_self) {
        line(ind, value);
        line(ind, fail(RuntimeErrorKind::TypeMismatch, "cannot assign to self"));
      } else {
        line(ind, "v_" + t.base.name + " = " + value);
      }
      return;
    }
    line(ind, "_oal_set(" + value + ", " + receiver(t.base) + ", " + py_string(*t.attr) + ")");
  }

  void stmt(const oal::Stmt& s, const oal::SelectInstances& n, int ind) {
    line(ind, tick(s));
    if (!m_.find_class(n.class_name)) {
      line(ind, fail(RuntimeErrorKind::UnknownClass, "unknown class " + n.class_name));
      return;
    }
    std::string pred = "None";
    if (n.where) {
      in_where_ = true;
      pred = "lambda _oal_sel: " + expr(*n.where);
      in_where_ = false;
    }
    bool many = n.mode == oal::SelectMode::Many;
    line(ind, "v_" + n.var + " = _oal_select(" + py_string(n.class_name) + ", " + (many ? "True" : "False") + ", " + pred + ")");
  }

  void stmt(const oal::Stmt& s, const oal::SelectRelated& n, int ind) {
    line(ind, tick(s));
    std::string chain = "(";
    for (const auto& step : n.chain) chain += "(" + py_string(step.class_name) + ", " + py_string(step.relation) + "), ";
    chain += ")";
    bool many = n.mode == oal::SelectMode::Many;
    line(ind, "v_" + n.var + " = _oal_related(" + var(n.start) + ", " + py_string(n.start) + ", " +
                  (many ? "True" : "False") + ", " + chain + ")");
  }

  void link_stmt(const oal::Stmt& s, const std::string& fn, const std::string& a, const std::string& b,
                 const std::string& rel, int ind) {
    line(ind, tick(s));
    if (!m_.find_relation(rel)) {
      line(ind, fail(RuntimeErrorKind::UnknownRelation, "unknown relation " + rel));
      return;
    }
    line(ind, fn + "(" + var(a) + ", " + var(b) + ", " + py_string(rel) + ", " + py_string(a) + ", " + py_string(b) + ")");
  }

  void stmt(const oal::Stmt& s, const oal::Relate& n, int ind) { link_stmt(s, "_oal_relate", n.a, n.b, n.relation, ind); }
  void stmt(const oal::Stmt& s, const oal::Unrelate& n, int ind) { link_stmt(s, "_oal_unrelate", n.a, n.b, n.relation, ind); }

  void stmt(const oal::Stmt& s, const oal::If& n, int ind) {
    line(ind, tick(s));
    for (std::size_t i = 0; i < n.arms.size(); ++i) {
      line(ind, std::string(i ? "elif" : "if") + " _oal_cond(" + expr(n.arms[i].cond) + ", \"if\"):");
      emit_block(n.arms[i].body, ind + 1);
    }
    if (n.has_else) {
      line(ind, "else:");
      emit_block(n.else_body, ind + 1);
    }
  }

  void stmt(const oal::Stmt& s, const oal::While& n, int ind) {
    line(ind, "while True:");
    line(ind + 1, tick(s));
    line(ind + 1, "if not _oal_cond(" + expr(n.cond) + ", \"while\"):");
    line(ind + 2, "break");
    if (!n.body.empty()) emit_block(n.body, ind + 1);
  }

  void stmt(const oal::Stmt& s, const oal::ForEach& n, int ind) {
    line(ind, tick(s));
    line(ind, "for v_" + n.var + " in _oal_foreach(" + var(n.set_var) + ", " + std::to_string(s.span.line) + "):");
    emit_block(n.body, ind + 1);
  }

  void stmt(const oal::Stmt& s, const oal::Return& n, int ind) {
    line(ind, tick(s));
    if (!n.value) {
      line(ind, "return _OAL_VOID");
    } else if (!meth_->returns) {
      line(ind, "return _oal_ret_undeclared(" + expr(*n.value) + ", " + py_string(where()) + ")");
    } else {
      line(ind, "return _oal_ret(" + expr(*n.value) + ", " + type_spec(*meth_->returns) + ", " + py_string(where()) + ")");
    }
  }

  void stmt(const oal::Stmt& s, const oal::CallStmt& n, int ind) {
    line(ind, tick(s));
    line(ind, expr(n.call));
  }

  const FusedModel& f_;
  const ClassModel& m_;
  GenOptions options_;
  std::ostringstream out_;
  std::map<std::string, std::string> method_names_;
  const ClassDef* cls_ = nullptr;
  const MethodDef* meth_ = nullptr;
  std::set<std::string> defined_;
  bool in_where_ = false;
};

}  // namespace

GenUnit generate_program(const FusedModel& fused, const std::optional<MethodKey>& entry, GenOptions options) {
  return Emitter(fused, options).run(entry);
}

}  // namespace xanim
