#include "xanim/runtime.hpp"

#include <boost/coroutine2/coroutine.hpp>
#include <boost/coroutine2/protected_fixedsize_stack.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "xanim/json_writer.hpp"

namespace xanim {

std::string_view runtime_error_kind_name(RuntimeErrorKind k) {
  switch (k) {
    case RuntimeErrorKind::StaleHandle: return "stale-handle";
    case RuntimeErrorKind::NoneDereference: return "none-dereference";
    case RuntimeErrorKind::TypeMismatch: return "type-mismatch";
    case RuntimeErrorKind::DivisionByZero: return "division-by-zero";
    case RuntimeErrorKind::UnknownMethod: return "unknown-method";
    case RuntimeErrorKind::ArityMismatch: return "arity-mismatch";
    case RuntimeErrorKind::CallDepthExceeded: return "call-depth-exceeded";
    case RuntimeErrorKind::StepBudgetExhausted: return "step-budget-exhausted";
    case RuntimeErrorKind::UndefinedVariable: return "undefined-variable";
    case RuntimeErrorKind::UnknownAttribute: return "unknown-attribute";
    case RuntimeErrorKind::UnknownClass: return "unknown-class";
    case RuntimeErrorKind::UnknownRelation: return "unknown-relation";
    case RuntimeErrorKind::Overflow: return "overflow";
  }
  return "?";
}

std::string_view session_status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::Ready: return "ready";
    case SessionStatus::Running: return "running";
    case SessionStatus::Paused: return "paused";
    case SessionStatus::Finished: return "finished";
    case SessionStatus::Failed: return "failed";
  }
  return "?";
}

std::string_view start_error_kind_name(StartErrorKind k) {
  switch (k) {
    case StartErrorKind::UnknownEntry: return "unknown-entry";
    case StartErrorKind::EmptyBodyEntry: return "empty-body-entry";
    case StartErrorKind::ArityMismatch: return "arity-mismatch";
    case StartErrorKind::TypeMismatch: return "type-mismatch";
  }
  return "?";
}

std::string Snapshot::to_json() const {
  JsonWriter w;
  w.begin_object().key("instances").begin_array();
  for (const auto& inst : instances) {
    w.begin_object().key("id").unsigned_integer(inst.id).key("class").string(inst.class_name);
    w.key("attrs").begin_object();
    for (const auto& [name, v] : inst.attrs) w.key(name).value(v);
    w.end_object().end_object();
  }
  w.end_array().key("links").begin_array();
  for (const auto& l : links) w.begin_object().key("rel").string(l.rel).key("a").unsigned_integer(l.a).key("b").unsigned_integer(l.b).end_object();
  w.end_array().key("status").string(session_status_name(status)).key("return_value");
  if (return_value)
    w.value(*return_value);
  else
    w.null();
  w.end_object();
  return w.take();
}

namespace {

using Coro = boost::coroutines2::coroutine<void>;

constexpr std::size_t kInterpreterStack = std::size_t{64} << 20;

struct Failure {
  RuntimeErrorKind kind;
  std::string message;
};

[[noreturn]] void fail(RuntimeErrorKind kind, std::string message) { throw Failure{kind, std::move(message)}; }

std::string kind_name(const Value& v) { return std::string(value_kind_name(v.kind())); }

bool is_numeric(const Value& v) { return v.is(ValueKind::Integer) || v.is(ValueKind::Real); }

double to_double(const Value& v) {
  return v.is(ValueKind::Integer) ? static_cast<double>(v.as_integer()) : v.as_real();
}

Value finite_real(double d) {
  if (!std::isfinite(d)) fail(RuntimeErrorKind::Overflow, "real result is not finite");
  return Value::real(d);
}

struct Frame {
  std::string owner;
  std::string method;
  const MethodDef* def = nullptr;
  std::optional<InstanceId> self;
  std::map<std::string, Value> locals;
  std::optional<Value> selected;
  std::optional<Value> return_value;
};

enum class Flow { Normal, Return };

}  // namespace

struct ExecSession::Impl {
  std::shared_ptr<const FusedModel> fused;
  const ClassModel& model;
  EventSink sink;
  SessionOptions options;

  std::uint64_t seq = 0;
  SessionStatus status = SessionStatus::Ready;
  std::map<InstanceId, ObjectInstance> live;
  InstanceId next_id = 1;
  std::set<Link> links;
  std::map<InstanceId, std::set<Link>> links_of;
  std::deque<Frame> stack;
  std::uint64_t commands = 0;
  int current_line = 0;
  int commands_this_resume = 0;
  std::optional<Value> return_value;
  StepOutcome final_outcome;
  const oal::MethodAst* entry_body = nullptr;
  Coro::pull_type* yield = nullptr;
  std::unique_ptr<Coro::push_type> coro;  // last: destroyed first

  Impl(std::shared_ptr<const FusedModel> f, EventSink s, SessionOptions o)
      : fused(std::move(f)), model(fused->model), sink(std::move(s)), options(o) {}

  // ---- events and state -----------------------------------------------------

  void emit(TraceEvent::Payload p) {
    TraceEvent e{++seq, std::move(p)};
    if (sink) sink(e);
  }

  Frame& frame() { return stack.back(); }

  InstanceId create_instance(const std::string& cls) {
    InstanceId id = next_id++;
    auto& inst = live[id];
    inst.id = id;
    inst.class_name = cls;
    emit(event::InstanceCreated{id, cls});
    for (const auto& a : model.all_attributes(cls)) {
      auto v = default_attribute_value(a.type);
      inst.attrs[a.name] = v;
      emit(event::AttributeSet{id, a.name, v});
    }
    return id;
  }

  void add_link(const Link& l) {
    links.insert(l);
    links_of[l.a].insert(l);
    links_of[l.b].insert(l);
  }

  void remove_link(const Link& l) {
    links.erase(l);
    if (auto it = links_of.find(l.a); it != links_of.end()) it->second.erase(l);
    if (auto it = links_of.find(l.b); it != links_of.end()) it->second.erase(l);
    emit(event::LinkRemoved{l.rel, l.a, l.b});
  }

  // Pre-order walk down composition links; parts in ascending id order.
  void delete_instance(InstanceId root) {
    std::vector<std::pair<InstanceId, bool>> work{{root, false}};
    while (!work.empty()) {
      auto [id, cascaded] = work.back();
      work.pop_back();
      if (!live.count(id)) continue;
      std::vector<InstanceId> parts;
      std::vector<Link> mine;
      if (auto it = links_of.find(id); it != links_of.end()) mine.assign(it->second.begin(), it->second.end());
      for (const auto& l : mine) {
        const auto* rel = model.find_relation(l.rel);
        if (rel && rel->kind == RelationKind::Composition && l.a == id && l.b != id) parts.push_back(l.b);
      }
      for (const auto& l : mine) remove_link(l);
      live.erase(id);
      links_of.erase(id);
      emit(event::InstanceDeleted{id, cascaded});
      std::sort(parts.begin(), parts.end());
      parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) work.emplace_back(*it, true);
    }
  }

  ObjectInstance& deref(const Value& v, const std::string& what) {
    if (!v.is(ValueKind::Handle)) fail(RuntimeErrorKind::TypeMismatch, what + " needs an instance handle, got " + kind_name(v));
    const auto& h = v.as_handle();
    if (!h.id) fail(RuntimeErrorKind::NoneDereference, what + " is none");
    auto it = live.find(*h.id);
    if (it == live.end()) fail(RuntimeErrorKind::StaleHandle, what + " refers to deleted instance " + std::to_string(*h.id));
    return it->second;
  }

  // Checks `v` against a declared type; Integer widens to Real.
  Value conform(const Value& v, const ValueType& t, const std::string& what) {
    using K = ValueType::Kind;
    switch (t.kind) {
      case K::Integer:
        if (v.is(ValueKind::Integer)) return v;
        break;
      case K::Real:
        if (v.is(ValueKind::Real)) return v;
        if (v.is(ValueKind::Integer)) return Value::real(static_cast<double>(v.as_integer()));
        break;
      case K::Boolean:
        if (v.is(ValueKind::Boolean)) return v;
        break;
      case K::String:
        if (v.is(ValueKind::String)) return v;
        break;
      case K::Instance:
        if (v.is(ValueKind::Handle)) {
          const auto& h = v.as_handle();
          if (!h.id) return v;
          auto it = live.find(*h.id);
          if (it == live.end())
            fail(RuntimeErrorKind::StaleHandle, what + " refers to deleted instance " + std::to_string(*h.id));
          if (model.is_a(it->second.class_name, t.class_name)) return v;
          fail(RuntimeErrorKind::TypeMismatch,
               what + " expects " + t.class_name + ", got instance of " + it->second.class_name);
        }
        break;
    }
    fail(RuntimeErrorKind::TypeMismatch, what + " expects " + t.name() + ", got " + kind_name(v));
  }

  Value local(const std::string& name) {
    auto& locals = frame().locals;
    auto it = locals.find(name);
    if (it == locals.end()) fail(RuntimeErrorKind::UndefinedVariable, "undefined variable '" + name + "'");
    return it->second;
  }

  Value self_value() { return Value::handle(frame().self); }

  const RelationDef& relation(const std::string& id) {
    const auto* r = model.find_relation(id);
    if (!r) fail(RuntimeErrorKind::UnknownRelation, "unknown relation " + id);
    return *r;
  }

  void require_class(const std::string& cls) {
    if (!model.find_class(cls)) fail(RuntimeErrorKind::UnknownClass, "unknown class " + cls);
  }

  // ---- expressions ------------------------------------------------------------

  Value eval(const oal::Expr& e) {
    return std::visit([&](const auto& n) { return eval_node(n); }, e.node);
  }

  Value eval_node(const oal::IntLit& n) { return Value::integer(n.value); }
  Value eval_node(const oal::RealLit& n) { return Value::real(n.value); }
  Value eval_node(const oal::StringLit& n) { return Value::string(n.value); }
  Value eval_node(const oal::BoolLit& n) { return Value::boolean(n.value); }
  Value eval_node(const oal::NoneLit&) { return Value::none(); }
  Value eval_node(const oal::VarRef& n) { return local(n.name); }
  Value eval_node(const oal::SelfRef&) { return self_value(); }
  Value eval_node(const oal::SelectedRef&) {
    if (!frame().selected) fail(RuntimeErrorKind::UndefinedVariable, "'selected' is only defined inside a where clause");
    return *frame().selected;
  }

  Value eval_node(const oal::AttrAccess& n) {
    auto recv = eval(*n.receiver);
    auto& inst = deref(recv, "receiver of ." + n.attr);
    auto it = inst.attrs.find(n.attr);
    if (it == inst.attrs.end())
      fail(RuntimeErrorKind::UnknownAttribute, "class " + inst.class_name + " has no attribute " + n.attr);
    return it->second;
  }

  Value eval_node(const oal::Call& n) {
    auto r = call(n);
    return r ? *r : Value::none();
  }

  Value eval_node(const oal::Binary& n) {
    using Op = oal::BinaryOp;
    if (n.op == Op::And || n.op == Op::Or) {
      auto l = eval(*n.lhs);
      if (!l.is(ValueKind::Boolean))
        fail(RuntimeErrorKind::TypeMismatch, "operand of '" + std::string(oal::binary_op_text(n.op)) + "' must be Boolean, got " + kind_name(l));
      if (n.op == Op::And ? !l.as_boolean() : l.as_boolean()) return l;
      auto r = eval(*n.rhs);
      if (!r.is(ValueKind::Boolean))
        fail(RuntimeErrorKind::TypeMismatch, "operand of '" + std::string(oal::binary_op_text(n.op)) + "' must be Boolean, got " + kind_name(r));
      return r;
    }
    auto l = eval(*n.lhs);
    auto r = eval(*n.rhs);
    switch (n.op) {
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: return arith(n.op, l, r);
      default: return compare(n.op, l, r);
    }
  }

  Value arith(oal::BinaryOp op, const Value& l, const Value& r) {
    using Op = oal::BinaryOp;
    if (op == Op::Add && l.is(ValueKind::String) && r.is(ValueKind::String)) {
      if (l.as_string().size() + r.as_string().size() > kMaxStringLength)
        fail(RuntimeErrorKind::Overflow, "string result exceeds the maximum length");
      return Value::string(l.as_string() + r.as_string());
    }
    if (!is_numeric(l) || !is_numeric(r))
      fail(RuntimeErrorKind::TypeMismatch, "operator '" + std::string(oal::binary_op_text(op)) + "' is not defined for " +
                                               kind_name(l) + " and " + kind_name(r));
    if (op == Op::Div) {
      if (to_double(r) == 0.0) fail(RuntimeErrorKind::DivisionByZero, "division by zero");
      return finite_real(to_double(l) / to_double(r));
    }
    if (l.is(ValueKind::Integer) && r.is(ValueKind::Integer)) {
      std::int64_t out = 0;
      bool overflow = op == Op::Add   ? __builtin_add_overflow(l.as_integer(), r.as_integer(), &out)
                      : op == Op::Sub ? __builtin_sub_overflow(l.as_integer(), r.as_integer(), &out)
                                      : __builtin_mul_overflow(l.as_integer(), r.as_integer(), &out);
      if (overflow) fail(RuntimeErrorKind::Overflow, "integer overflow");
      return Value::integer(out);
    }
    double a = to_double(l), b = to_double(r);
    return finite_real(op == Op::Add ? a + b : op == Op::Sub ? a - b : a * b);
  }

  Value compare(oal::BinaryOp op, const Value& l, const Value& r) {
    using Op = oal::BinaryOp;
    bool equality = op == Op::Eq || op == Op::Ne;
    int c = 0;  // <0, 0, >0
    if (is_numeric(l) && is_numeric(r)) {
      if (l.is(ValueKind::Integer) && r.is(ValueKind::Integer))
        c = l.as_integer() < r.as_integer() ? -1 : l.as_integer() > r.as_integer() ? 1 : 0;
      else {
        double a = to_double(l), b = to_double(r);
        c = a < b ? -1 : a > b ? 1 : 0;
      }
    } else if (l.kind() != r.kind()) {
      fail(RuntimeErrorKind::TypeMismatch, "cannot compare " + kind_name(l) + " with " + kind_name(r));
    } else if (l.is(ValueKind::String)) {
      int k = l.as_string().compare(r.as_string());
      c = k < 0 ? -1 : k > 0 ? 1 : 0;
    } else {
      if (!equality)
        fail(RuntimeErrorKind::TypeMismatch, "operator '" + std::string(oal::binary_op_text(op)) + "' is not defined for " + kind_name(l));
      c = (l == r) ? 0 : 1;
    }
    switch (op) {
      case Op::Eq: return Value::boolean(c == 0);
      case Op::Ne: return Value::boolean(c != 0);
      case Op::Lt: return Value::boolean(c < 0);
      case Op::Le: return Value::boolean(c <= 0);
      case Op::Gt: return Value::boolean(c > 0);
      default: return Value::boolean(c >= 0);
    }
  }

  Value eval_node(const oal::Unary& n) {
    using Op = oal::UnaryOp;
    auto v = eval(*n.operand);
    switch (n.op) {
      case Op::Neg:
        if (v.is(ValueKind::Integer)) {
          if (v.as_integer() == INT64_MIN) fail(RuntimeErrorKind::Overflow, "integer overflow");
          return Value::integer(-v.as_integer());
        }
        if (v.is(ValueKind::Real)) return Value::real(-v.as_real());
        fail(RuntimeErrorKind::TypeMismatch, "unary '-' is not defined for " + kind_name(v));
      case Op::Not:
        if (!v.is(ValueKind::Boolean)) fail(RuntimeErrorKind::TypeMismatch, "operand of 'not' must be Boolean, got " + kind_name(v));
        return Value::boolean(!v.as_boolean());
      case Op::Cardinality:
      case Op::Empty:
      case Op::NotEmpty: {
        std::int64_t count = 0;
        if (v.is(ValueKind::Set))
          count = static_cast<std::int64_t>(v.as_set().ids.size());
        else if (v.is(ValueKind::Handle))
          count = v.as_handle().id ? 1 : 0;
        else
          fail(RuntimeErrorKind::TypeMismatch, "'" + std::string(oal::unary_op_text(n.op)) + "' needs a set or handle, got " + kind_name(v));
        if (n.op == Op::Cardinality) return Value::integer(count);
        return Value::boolean(n.op == Op::Empty ? count == 0 : count != 0);
      }
    }
    return v;
  }

  // ---- calls ------------------------------------------------------------------

  std::optional<Value> call(const oal::Call& c) {
    bool static_call = false;
    std::string cls;
    std::optional<Value> recv;
    if (c.receiver.is_self) {
      recv = self_value();
    } else if (model.find_class(c.receiver.name)) {
      static_call = true;
      cls = c.receiver.name;
    } else {
      recv = local(c.receiver.name);
    }
    std::vector<Value> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(eval(a));
    std::optional<InstanceId> callee;
    if (!static_call) {
      auto& inst = deref(*recv, "receiver of " + c.method + "()");
      cls = inst.class_name;
      callee = inst.id;
    }
    auto res = resolve_method(model, cls, c.method);
    if (!res) fail(RuntimeErrorKind::UnknownMethod, "class " + cls + " has no method " + c.method);
    if (static_call && !res->method->is_static)
      fail(RuntimeErrorKind::UnknownMethod, res->owner + "." + c.method + " is an instance method, not static");
    if (res->method->is_static) callee.reset();
    const auto& params = res->method->params;
    if (args.size() != params.size())
      fail(RuntimeErrorKind::ArityMismatch, res->owner + "." + c.method + " takes " + std::to_string(params.size()) +
                                                " argument(s), got " + std::to_string(args.size()));
    for (std::size_t i = 0; i < args.size(); ++i)
      args[i] = conform(args[i], params[i].type, "argument '" + params[i].name + "' of " + res->owner + "." + c.method);
    if (stack.size() >= kMaxCallDepth)
      fail(RuntimeErrorKind::CallDepthExceeded, "call depth exceeds " + std::to_string(kMaxCallDepth));
    return invoke(*res, callee, std::move(args));
  }

  void push_frame(const ResolvedMethod& m, std::optional<InstanceId> self, std::vector<Value> args) {
    Frame f;
    f.owner = m.owner;
    f.method = m.method->name;
    f.def = m.method;
    f.self = self;
    for (std::size_t i = 0; i < args.size(); ++i) f.locals[m.method->params[i].name] = std::move(args[i]);
    stack.push_back(std::move(f));
  }

  event::MethodCall call_event(const ResolvedMethod& m, std::optional<InstanceId> callee,
                               std::optional<InstanceId> caller) {
    return event::MethodCall{caller, callee, m.owner, m.method->name, m.method->is_static};
  }

  std::optional<Value> invoke(const ResolvedMethod& m, std::optional<InstanceId> callee, std::vector<Value> args) {
    std::optional<InstanceId> caller = frame().self;
    if (caller && !live.count(*caller)) caller.reset();
    emit(call_event(m, callee, caller));
    push_frame(m, callee, std::move(args));
    if (const auto* body = fused->body(m.owner, m.method->name)) exec_block(body->statements);
    auto ret = std::move(frame().return_value);
    stack.pop_back();
    emit(event::MethodReturn{ret});
    return ret;
  }

  // ---- statements -------------------------------------------------------------

  void begin_command(const oal::Stmt& s) {
    if (commands_this_resume > 0) (*yield)();
    ++commands_this_resume;
    current_line = s.span.line;
    if (commands >= options.step_budget)
      fail(RuntimeErrorKind::StepBudgetExhausted, "step budget of " + std::to_string(options.step_budget) + " commands exhausted");
    ++commands;
    emit(event::Command{frame().owner, frame().method, s.span.line, s.span.col_start, s.span.col_end});
  }

  Flow exec_block(const oal::Block& b) {
    for (const auto& s : b)
      if (exec(s) == Flow::Return) return Flow::Return;
    return Flow::Normal;
  }

  Flow exec(const oal::Stmt& s) {
    return std::visit([&](const auto& n) { return exec_node(s, n); }, s.node);
  }

  Flow exec_node(const oal::Stmt& s, const oal::Create& n) {
    begin_command(s);
    require_class(n.class_name);
    auto id = create_instance(n.class_name);
    frame().locals[n.var] = Value::handle(id);
    return Flow::Normal;
  }

  Flow exec_node(const oal::Stmt& s, const oal::Delete& n) {
    begin_command(s);
    auto id = deref(local(n.var), "'" + n.var + "'").id;
    delete_instance(id);
    return Flow::Normal;
  }

  Flow exec_node(const oal::Stmt& s, const oal::Assign& n) {
    begin_command(s);
    auto v = eval(n.value);
    const auto& t = n.target;
    if (!t.attr) {
      if (t.base.is_self) fail(RuntimeErrorKind::TypeMismatch, "cannot assign to self");
      frame().locals[t.base.name] = std::move(v);
      return Flow::Normal;
    }
    auto recv = t.base.is_self ? self_value() : local(t.base.name);
    auto& inst = deref(recv, "receiver of ." + *t.attr);
    const auto* def = model.find_attribute(inst.class_name, *t.attr);
    if (!def) fail(RuntimeErrorKind::UnknownAttribute, "class " + inst.class_name + " has no attribute " + *t.attr);
    auto id = inst.id;
    auto conformed = conform(v, def->type, "attribute " + inst.class_name + "." + *t.attr);
    live.at(id).attrs[*t.attr] = conformed;
    emit(event::AttributeSet{id, *t.attr, std::move(conformed)});
    return Flow::Normal;
  }

  Flow exec_node(const oal::Stmt& s, const oal::SelectInstances& n) {
    begin_command(s);
    require_class(n.class_name);
    std::vector<InstanceId> candidates;
    for (const auto& [id, inst] : live)
      if (model.is_a(inst.class_name, n.class_name)) candidates.push_back(id);
    std::vector<InstanceId> matches;
    for (auto id : candidates) {
      if (!live.count(id)) continue;
      if (n.where) {
        auto saved = frame().selected;
        frame().selected = Value::handle(id);
        auto ok = eval(*n.where);
        frame().selected = std::move(saved);
        if (!ok.is(ValueKind::Boolean)) fail(RuntimeErrorKind::TypeMismatch, "where clause must be Boolean, got " + kind_name(ok));
        if (!ok.as_boolean()) continue;
      }
      matches.push_back(id);
      if (n.mode != oal::SelectMode::Many) break;
    }
    frame().locals[n.var] = select_result(n.mode, matches);
    return Flow::Normal;
  }

  static Value select_result(oal::SelectMode mode, const std::vector<InstanceId>& ids) {
    if (mode == oal::SelectMode::Many) return Value::set(ids);
    if (ids.empty()) return Value::none();
    return Value::handle(*std::min_element(ids.begin(), ids.end()));
  }

  Flow exec_node(const oal::Stmt& s, const oal::SelectRelated& n) {
    begin_command(s);
    auto start = local(n.start);
    std::vector<InstanceId> current;
    if (start.is(ValueKind::Handle)) {
      if (start.as_handle().id) current.push_back(deref(start, "'" + n.start + "'").id);
    } else if (start.is(ValueKind::Set)) {
      for (auto id : start.as_set().ids) {
        if (!live.count(id)) fail(RuntimeErrorKind::StaleHandle, "'" + n.start + "' contains deleted instance " + std::to_string(id));
        current.push_back(id);
      }
    } else {
      fail(RuntimeErrorKind::TypeMismatch, "navigation needs a handle or set, got " + kind_name(start));
    }
    for (const auto& step : n.chain) {
      relation(step.relation);
      require_class(step.class_name);
      std::set<InstanceId> next;
      for (auto id : current) {
        auto it = links_of.find(id);
        if (it == links_of.end()) continue;
        for (const auto& l : it->second) {
          if (l.rel != step.relation) continue;
          if (l.a == id && model.is_a(live.at(l.b).class_name, step.class_name)) next.insert(l.b);
          if (l.b == id && model.is_a(live.at(l.a).class_name, step.class_name)) next.insert(l.a);
        }
      }
      current.assign(next.begin(), next.end());
    }
    frame().locals[n.var] = select_result(n.mode, current);
    return Flow::Normal;
  }

  std::pair<InstanceId, InstanceId> endpoints(const std::string& a, const std::string& b, const RelationDef& rel) {
    auto va = local(a);
    auto vb = local(b);
    auto& ia = deref(va, "'" + a + "'");
    auto& ib = deref(vb, "'" + b + "'");
    if (model.is_a(ia.class_name, rel.from) && model.is_a(ib.class_name, rel.to)) return {ia.id, ib.id};
    if (model.is_a(ib.class_name, rel.from) && model.is_a(ia.class_name, rel.to)) return {ib.id, ia.id};
    fail(RuntimeErrorKind::TypeMismatch, "relation " + rel.id + " does not connect " + ia.class_name + " and " + ib.class_name);
  }

  std::size_t count_links(InstanceId id, const std::string& rel, bool as_from) {
    std::size_t n = 0;
    if (auto it = links_of.find(id); it != links_of.end())
      for (const auto& l : it->second)
        if (l.rel == rel && (as_from ? l.a : l.b) == id) ++n;
    return n;
  }

  Flow exec_node(const oal::Stmt& s, const oal::Relate& n) {
    begin_command(s);
    const auto& rel = relation(n.relation);
    auto [a, b] = endpoints(n.a, n.b, rel);
    Link l{rel.id, a, b};
    if (links.count(l)) return Flow::Normal;
    add_link(l);
    bool warn = false;
    if (auto up = multiplicity_upper(rel.to_mult); up && count_links(a, rel.id, true) > static_cast<std::size_t>(*up)) warn = true;
    if (auto up = multiplicity_upper(rel.from_mult); up && count_links(b, rel.id, false) > static_cast<std::size_t>(*up)) warn = true;
    emit(event::LinkCreated{rel.id, a, b, warn});
    return Flow::Normal;
  }

  Flow exec_node(const oal::Stmt& s, const oal::Unrelate& n) {
    begin_command(s);
    const auto& rel = relation(n.relation);
    auto va = local(n.a);
    auto vb = local(n.b);
    auto ia = deref(va, "'" + n.a + "'").id;
    auto ib = deref(vb, "'" + n.b + "'").id;
    Link forward{rel.id, ia, ib}, backward{rel.id, ib, ia};
    if (links.count(forward))
      remove_link(forward);
    else if (links.count(backward))
      remove_link(backward);
    return Flow::Normal;
  }

  bool condition(const oal::Expr& e, const char* what) {
    auto v = eval(e);
    if (!v.is(ValueKind::Boolean)) fail(RuntimeErrorKind::TypeMismatch, std::string(what) + " condition must be Boolean, got " + kind_name(v));
    return v.as_boolean();
  }

  Flow exec_node(const oal::Stmt& s, const oal::If& n) {
    begin_command(s);
    for (const auto& arm : n.arms)
      if (condition(arm.cond, "if")) return exec_block(arm.body);
    if (n.has_else) return exec_block(n.else_body);
    return Flow::Normal;
  }

  Flow exec_node(const oal::Stmt& s, const oal::While& n) {
    for (;;) {
      begin_command(s);
      if (!condition(n.cond, "while")) return Flow::Normal;
      if (exec_block(n.body) == Flow::Return) return Flow::Return;
    }
  }

  Flow exec_node(const oal::Stmt& s, const oal::ForEach& n) {
    begin_command(s);
    auto coll = local(n.set_var);
    if (!coll.is(ValueKind::Set)) fail(RuntimeErrorKind::TypeMismatch, "for each needs a set, got " + kind_name(coll));
    const auto ids = coll.as_set().ids;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) begin_command(s);
      frame().locals[n.var] = Value::handle(ids[i]);
      if (exec_block(n.body) == Flow::Return) return Flow::Return;
    }
    if (!ids.empty()) begin_command(s);
    return Flow::Normal;
  }

  Flow exec_node(const oal::Stmt& s, const oal::Return& n) {
    begin_command(s);
    if (n.value) {
      auto v = eval(*n.value);
      const auto* def = frame().def;
      if (!def->returns)
        fail(RuntimeErrorKind::TypeMismatch, frame().owner + "." + frame().method + " declares no return value");
      frame().return_value = conform(v, *def->returns, "return value of " + frame().owner + "." + frame().method);
    }
    return Flow::Return;
  }

  Flow exec_node(const oal::Stmt& s, const oal::CallStmt& n) {
    begin_command(s);
    call(std::get<oal::Call>(n.call.node));
    return Flow::Normal;
  }

  // ---- driver -----------------------------------------------------------------

  void body(Coro::pull_type& y) {
    yield = &y;
    try {
      exec_block(entry_body->statements);
      auto ret = std::move(frame().return_value);
      stack.pop_back();
      emit(event::MethodReturn{ret});
      emit(event::RunFinished{"finished"});
      status = SessionStatus::Finished;
      return_value = ret;
      final_outcome = StepOutcome{StepOutcome::Kind::Finished, ret, std::nullopt};
    } catch (const Failure& f) {
      RuntimeError err{f.kind, f.message, current_line};
      emit(event::Error{std::string(runtime_error_kind_name(f.kind)), f.message, current_line});
      status = SessionStatus::Failed;
      final_outcome = StepOutcome{StepOutcome::Kind::Failed, std::nullopt, err};
    }
  }

  StepOutcome step() {
    if (status == SessionStatus::Finished || status == SessionStatus::Failed) return final_outcome;
    status = SessionStatus::Running;
    commands_this_resume = 0;
    (*coro)();
    if (status == SessionStatus::Running) {
      status = SessionStatus::Paused;
      return StepOutcome{};
    }
    return final_outcome;
  }

  Snapshot snapshot() const {
    Snapshot s;
    for (const auto& [id, inst] : live) s.instances.push_back(inst);
    s.links.assign(links.begin(), links.end());
    s.status = status;
    s.return_value = return_value;
    return s;
  }
};

ExecSession::ExecSession(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ExecSession::~ExecSession() = default;

StepOutcome ExecSession::step() { return impl_->step(); }
SessionStatus ExecSession::status() const { return impl_->status; }
Snapshot ExecSession::snapshot() const { return impl_->snapshot(); }
std::uint64_t ExecSession::commands_executed() const { return impl_->commands; }
const FusedModel& ExecSession::fused() const { return *impl_->fused; }

std::unique_ptr<ExecSession> start_session(std::shared_ptr<const FusedModel> fused, std::string_view cls,
                                           std::string_view method, std::vector<Value> args, EventSink sink,
                                           SessionOptions options) {
  const auto& model = fused->model;
  std::string entry = std::string(cls) + "." + std::string(method);
  if (!model.find_class(cls)) throw StartError(StartErrorKind::UnknownEntry, "unknown entry class in " + entry);
  auto res = resolve_method(model, cls, method);
  if (!res) throw StartError(StartErrorKind::UnknownEntry, "unknown entry method " + entry);
  const auto* body = fused->body(res->owner, res->method->name);
  if (!body || body->statements.empty())
    throw StartError(StartErrorKind::EmptyBodyEntry, "entry " + entry + " has an empty body; an entry method needs at least one command");
  const auto& params = res->method->params;
  if (args.size() != params.size())
    throw StartError(StartErrorKind::ArityMismatch, "entry " + entry + " takes " + std::to_string(params.size()) +
                                                        " argument(s), got " + std::to_string(args.size()));

  auto impl = std::make_unique<ExecSession::Impl>(std::move(fused), std::move(sink), options);
  // No instance exists yet, so a non-none handle argument can never conform.
  for (std::size_t i = 0; i < args.size(); ++i) {
    try {
      args[i] = impl->conform(args[i], params[i].type, "argument '" + params[i].name + "' of " + entry);
    } catch (const Failure& f) {
      throw StartError(StartErrorKind::TypeMismatch, f.message);
    }
  }

  impl->emit(event::RunStarted{});
  std::optional<InstanceId> self;
  if (!res->method->is_static) self = impl->create_instance(std::string(cls));
  impl->emit(impl->call_event(*res, self, std::nullopt));
  impl->push_frame(*res, self, std::move(args));
  impl->entry_body = body;
  auto* raw = impl.get();
  impl->coro = std::make_unique<Coro::push_type>(boost::coroutines2::protected_fixedsize_stack(kInterpreterStack),
                                                 [raw](Coro::pull_type& y) { raw->body(y); });
  return std::unique_ptr<ExecSession>(new ExecSession(std::move(impl)));
}

Snapshot run_to_completion(ExecSession& s) {
  while (s.step().kind == StepOutcome::Kind::Progressed) {
  }
  return s.snapshot();
}

}  // namespace xanim
