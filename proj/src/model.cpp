#include "xanim/model.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace xanim {

std::string to_string(const Diagnostic& d) {
  std::string out = d.severity == Severity::Error ? "error" : "warning";
  if (d.span.line > 0)
    out += " at " + std::to_string(d.span.line) + ":" + std::to_string(d.span.col_start);
  return out + ": " + d.message;
}

const MethodDef* ClassDef::find_method(std::string_view method) const {
  for (const auto& m : methods)
    if (m.name == method) return &m;
  return nullptr;
}

const ClassDef* ClassModel::find_class(std::string_view name) const {
  for (const auto& c : classes)
    if (c.name == name) return &c;
  return nullptr;
}

const RelationDef* ClassModel::find_relation(std::string_view id) const {
  for (const auto& r : relations)
    if (r.id == id) return &r;
  return nullptr;
}

std::optional<std::string> ClassModel::parent_of(std::string_view cls) const {
  for (const auto& g : generalizations)
    if (g.sub == cls) return g.super;
  return std::nullopt;
}

std::vector<std::string> ClassModel::lineage(std::string_view cls) const {
  std::vector<std::string> out{std::string(cls)};
  // Bounded by the class count so a cyclic (unvalidated) model still terminates.
  while (out.size() <= classes.size()) {
    auto parent = parent_of(out.back());
    if (!parent) break;
    out.push_back(*parent);
  }
  return out;
}

bool ClassModel::is_a(std::string_view cls, std::string_view ancestor) const {
  for (const auto& c : lineage(cls))
    if (c == ancestor) return true;
  return false;
}

std::vector<AttributeDef> ClassModel::all_attributes(std::string_view cls) const {
  auto chain = lineage(cls);
  std::vector<AttributeDef> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    if (const auto* c = find_class(*it))
      out.insert(out.end(), c->attributes.begin(), c->attributes.end());
  return out;
}

const AttributeDef* ClassModel::find_attribute(std::string_view cls, std::string_view attr) const {
  for (const auto& name : lineage(cls))
    if (const auto* c = find_class(name))
      for (const auto& a : c->attributes)
        if (a.name == attr) return &a;
  return nullptr;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

bool is_relation_id(std::string_view s) {
  return s.size() >= 2 && s[0] == 'R' &&
         std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_multiplicity(std::string_view s) {
  return s == "1" || s == "0..1" || s == "0..*" || s == "1..*";
}

std::optional<int> multiplicity_upper(std::string_view mult) {
  if (mult == "1" || mult == "0..1") return 1;
  return std::nullopt;
}

std::string_view relation_kind_name(RelationKind k) {
  return k == RelationKind::Composition ? "composition" : "association";
}

namespace {

class Validator {
 public:
  explicit Validator(const ClassModel& m) : m_(m) {}

  std::vector<Diagnostic> run() {
    check_classes();
    check_generalizations();
    check_members();
    check_relations();
    return std::move(out_);
  }

 private:
  void report(std::string msg) { out_.push_back(error_at(std::move(msg))); }

  bool known(std::string_view cls) const { return names_.count(std::string(cls)) > 0; }

  void check_type(const ValueType& t, const std::string& where) {
    if (t.kind == ValueType::Kind::Instance && !known(t.class_name))
      report("unknown type " + t.class_name + " in " + where);
  }

  void check_classes() {
    for (const auto& c : m_.classes) {
      if (!is_identifier(c.name)) {
        report("invalid class name '" + c.name + "'");
        continue;
      }
      if (is_primitive_type_name(c.name)) report("class name " + c.name + " collides with a primitive type");
      if (!names_.insert(c.name).second) report("duplicate class " + c.name);
    }
  }

  void check_generalizations() {
    std::map<std::string, std::string> parent;
    for (const auto& g : m_.generalizations) {
      bool ok = true;
      for (const auto* end : {&g.sub, &g.super}) {
        if (!known(*end)) {
          report("unknown class " + *end + " in generalization " + g.sub + " -> " + g.super);
          ok = false;
        }
      }
      if (!ok) continue;
      if (!parent.emplace(g.sub, g.super).second) {
        report("multiple inheritance: class " + g.sub + " has more than one superclass");
        continue;
      }
    }
    // Each class has at most one parent, so cycles are found by walking
    // parent pointers; a cycle is reported once, by its sorted members.
    std::set<std::string> settled;
    for (const auto& [start, _] : parent) {
      std::vector<std::string> path;
      std::string cur = start;
      while (!settled.count(cur)) {
        auto pos = std::find(path.begin(), path.end(), cur);
        if (pos != path.end()) {
          std::vector<std::string> members(pos, path.end());
          std::sort(members.begin(), members.end());
          std::string msg = "generalization cycle:";
          for (std::size_t i = 0; i < members.size(); ++i) msg += (i ? ", " : " ") + members[i];
          report(msg);
          cyclic_ = true;
          break;
        }
        path.push_back(cur);
        auto it = parent.find(cur);
        if (it == parent.end()) break;
        cur = it->second;
      }
      settled.insert(path.begin(), path.end());
    }
  }

  void check_members() {
    for (const auto& c : m_.classes) {
      if (!is_identifier(c.name)) continue;
      std::set<std::string> attrs;
      for (const auto& a : c.attributes) {
        if (!is_identifier(a.name)) report("invalid attribute name '" + a.name + "' in class " + c.name);
        if (!attrs.insert(a.name).second) report("duplicate attribute " + c.name + "." + a.name);
        check_type(a.type, "attribute " + c.name + "." + a.name);
      }
      if (!cyclic_) {
        auto chain = m_.lineage(c.name);
        for (std::size_t i = 1; i < chain.size(); ++i) {
          const auto* anc = m_.find_class(chain[i]);
          if (!anc) continue;
          for (const auto& a : anc->attributes)
            if (attrs.count(a.name))
              report("attribute " + c.name + "." + a.name + " duplicates inherited attribute from " + anc->name);
        }
      }
      std::set<std::string> methods;
      for (const auto& meth : c.methods) {
        const std::string where = c.name + "." + meth.name;
        if (!is_identifier(meth.name)) report("invalid method name '" + meth.name + "' in class " + c.name);
        if (!methods.insert(meth.name).second) report("duplicate method " + where);
        std::set<std::string> params;
        for (const auto& p : meth.params) {
          if (!is_identifier(p.name)) report("invalid parameter name '" + p.name + "' in " + where);
          if (p.name == "self") report("parameter name 'self' is reserved in " + where);
          if (!params.insert(p.name).second) report("duplicate parameter " + p.name + " in " + where);
          check_type(p.type, "parameter " + p.name + " of " + where);
        }
        if (meth.returns) check_type(*meth.returns, "return type of " + where);
      }
    }
  }

  void check_relations() {
    std::set<std::string> ids;
    for (const auto& r : m_.relations) {
      if (!is_relation_id(r.id)) report("invalid relation id '" + r.id + "'");
      if (!ids.insert(r.id).second) report("duplicate relation " + r.id);
      for (const auto* end : {&r.from, &r.to})
        if (!known(*end)) report("unknown class " + *end + " in relation " + r.id);
      for (const auto* mult : {&r.from_mult, &r.to_mult})
        if (!is_multiplicity(*mult)) report("invalid multiplicity '" + *mult + "' in relation " + r.id);
    }
  }

  const ClassModel& m_;
  std::set<std::string> names_;
  bool cyclic_ = false;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate_model(const ClassModel& m) { return Validator(m).run(); }

std::optional<ResolvedMethod> resolve_method(const ClassModel& m, std::string_view cls,
                                             std::string_view method) {
  for (const auto& name : m.lineage(cls)) {
    const auto* c = m.find_class(name);
    if (!c) return std::nullopt;
    if (const auto* def = c->find_method(method)) return ResolvedMethod{c->name, def};
  }
  return std::nullopt;
}

Value default_attribute_value(const ValueType& t) {
  switch (t.kind) {
    case ValueType::Kind::Integer: return Value::integer(0);
    case ValueType::Kind::Real: return Value::real(0.0);
    case ValueType::Kind::Boolean: return Value::boolean(false);
    case ValueType::Kind::String: return Value::string("");
    case ValueType::Kind::Instance: return Value::none();
  }
  return Value::none();
}

}  // namespace xanim
