#include <expat.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "xanim/ingest.hpp"

namespace xanim {

namespace {

// ---- minimal DOM over expat -------------------------------------------------

std::string_view local_part(std::string_view qname) {
  auto colon = qname.rfind(':');
  return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
}

struct XmlAttr {
  std::string qname;
  std::string value;
};

struct XmlElement {
  std::string local;
  int line = 0;
  std::vector<XmlAttr> attrs;
  std::vector<std::unique_ptr<XmlElement>> children;

  // Unprefixed attribute, e.g. name="..".
  const std::string* plain(std::string_view name) const {
    for (const auto& a : attrs)
      if (a.qname == name) return &a.value;
    return nullptr;
  }
  // Prefixed attribute matched on its local name, e.g. xmi:id.
  const std::string* prefixed(std::string_view local_name) const {
    for (const auto& a : attrs)
      if (a.qname.find(':') != std::string::npos && local_part(a.qname) == local_name) return &a.value;
    return nullptr;
  }
  std::string xmi_type() const {
    const auto* t = prefixed("type");
    return t ? std::string(local_part(*t)) : std::string();
  }
};

struct DomBuilder {
  std::unique_ptr<XmlElement> root;
  std::vector<XmlElement*> stack;
  XML_Parser parser = nullptr;

  static void on_start(void* ud, const XML_Char* name, const XML_Char** atts) {
    auto* self = static_cast<DomBuilder*>(ud);
    auto el = std::make_unique<XmlElement>();
    el->local = std::string(local_part(name));
    el->line = static_cast<int>(XML_GetCurrentLineNumber(self->parser));
    for (int i = 0; atts[i]; i += 2) el->attrs.push_back({atts[i], atts[i + 1]});
    XmlElement* raw = el.get();
    if (self->stack.empty())
      self->root = std::move(el);
    else
      self->stack.back()->children.push_back(std::move(el));
    self->stack.push_back(raw);
  }
  static void on_end(void* ud, const XML_Char*) { static_cast<DomBuilder*>(ud)->stack.pop_back(); }
};

// windows-1252 bytes 0x80..0x9F; -1 marks bytes with no assignment.
constexpr int kCp1252High[32] = {0x20AC, -1,     0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
                                 0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, -1,     0x017D, -1,
                                 -1,     0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
                                 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, -1,     0x017E, 0x0178};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

int unknown_encoding(void*, const XML_Char* name, XML_Encoding* info) {
  std::string_view n(name);
  if (!iequals(n, "windows-1252") && !iequals(n, "cp1252")) return XML_STATUS_ERROR;
  for (int i = 0; i < 256; ++i) info->map[i] = i;
  for (int i = 0; i < 32; ++i) info->map[0x80 + i] = kCp1252High[i] < 0 ? 0x80 + i : kCp1252High[i];
  info->data = nullptr;
  info->convert = nullptr;
  info->release = nullptr;
  return XML_STATUS_OK;
}

std::unique_ptr<XmlElement> parse_xml(std::string_view text) {
  DomBuilder b;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> p(XML_ParserCreate(nullptr),
                                                                                   &XML_ParserFree);
  b.parser = p.get();
  XML_SetUserData(p.get(), &b);
  XML_SetElementHandler(p.get(), &DomBuilder::on_start, &DomBuilder::on_end);
  XML_SetUnknownEncodingHandler(p.get(), &unknown_encoding, nullptr);
  if (XML_Parse(p.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) == XML_STATUS_ERROR) {
    throw IngestError(IngestErrorKind::MalformedXml,
                      "malformed XML at line " + std::to_string(XML_GetCurrentLineNumber(p.get())) + ", column " +
                          std::to_string(XML_GetCurrentColumnNumber(p.get())) + ": " +
                          XML_ErrorString(XML_GetErrorCode(p.get())));
  }
  if (!b.root) throw IngestError(IngestErrorKind::MalformedXml, "empty XML document");
  return std::move(b.root);
}

// ---- XMI mapping -------------------------------------------------------------

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Primitive guessed from an EA type reference such as "EAJava_int" or
// ".../uml.xml#Integer". nullopt = void, "" = not recognised.
std::optional<std::string> primitive_from_ref(std::string_view ref) {
  auto cut = ref.find_last_of("#_:/");
  auto tail = lower(cut == std::string_view::npos ? ref : ref.substr(cut + 1));
  static const std::map<std::string, std::string> kNames = {
      {"integer", "Integer"}, {"int", "Integer"},    {"long", "Integer"},   {"short", "Integer"},
      {"byte", "Integer"},    {"real", "Real"},      {"double", "Real"},    {"float", "Real"},
      {"decimal", "Real"},    {"boolean", "Boolean"}, {"bool", "Boolean"},  {"string", "String"},
      {"char", "String"},     {"unlimitednatural", "Integer"}};
  if (tail == "void") return std::nullopt;
  auto it = kNames.find(tail);
  return it == kNames.end() ? std::string() : it->second;
}

struct EndInfo {
  const XmlElement* el = nullptr;
};

class XmiImporter {
 public:
  XmiImport run(const XmlElement& root) {
    std::vector<const XmlElement*> models;
    if (root.local == "Model") {
      models.push_back(&root);
    } else {
      for (const auto& c : root.children)
        if (c->local == "Model") models.push_back(c.get());
      if (root.local != "XMI") warn(root, "unexpected root element '" + root.local + "'");
    }
    if (models.empty()) warn(root, "no Model element found");
    for (const auto* m : models) collect(*m);
    index_properties(root);

    for (const auto* c : classes_) {
      const auto* id = c->prefixed("id");
      if (id) class_ids_[*id] = name_of(*c);
    }
    for (const auto* c : classes_) build_class(*c);
    for (const auto* a : associations_) build_association(*a);
    assign_relation_ids();

    auto diags = validate_model(out_.model);
    if (!diags.empty())
      throw IngestError(IngestErrorKind::ValidationFailure, "imported model failed validation: " + diags.front().message,
                        std::move(diags));
    return std::move(out_);
  }

 private:
  void warn(const XmlElement& el, std::string msg) { out_.warnings.push_back(warning_at(std::move(msg), {el.line, 0, 0})); }

  static std::string name_of(const XmlElement& el) {
    const auto* n = el.plain("name");
    return n ? *n : std::string();
  }

  void collect(const XmlElement& container) {
    for (const auto& child : container.children) {
      const auto& el = *child;
      if (el.local != "packagedElement") {
        if (el.local != "Extension" && el.local != "Documentation")
          warn(el, "skipped element '" + el.local + "'");
        continue;
      }
      auto type = el.xmi_type();
      if (type == "Class")
        classes_.push_back(&el);
      else if (type == "Association")
        associations_.push_back(&el);
      else if (type == "Package")
        collect(el);
      else
        warn(el, "skipped " + (type.empty() ? std::string("untyped element") : type) + " '" + name_of(el) + "'");
    }
  }

  void index_properties(const XmlElement& el) {
    if (el.local == "ownedAttribute" || el.local == "ownedEnd")
      if (const auto* id = el.prefixed("id")) properties_[*id] = &el;
    for (const auto& c : el.children) index_properties(*c);
  }

  // Reference to a type: `type` attribute, or a <type xmi:idref/href> child.
  std::optional<std::string> type_ref(const XmlElement& el) const {
    if (const auto* t = el.plain("type")) return *t;
    for (const auto& c : el.children) {
      if (c->local != "type") continue;
      if (const auto* r = c->prefixed("idref")) return *r;
      if (const auto* h = c->plain("href")) return *h;
    }
    return std::nullopt;
  }

  // nullopt for void. Untyped and unrecognised types fall back to String.
  std::optional<ValueType> resolve_type(const XmlElement& el, const std::string& what) {
    auto ref = type_ref(el);
    if (!ref) return ValueType::string();
    if (auto it = class_ids_.find(*ref); it != class_ids_.end()) return ValueType::instance_of(it->second);
    auto prim = primitive_from_ref(*ref);
    if (!prim) return std::nullopt;
    if (prim->empty()) {
      warn(el, "unrecognised type '" + *ref + "' for " + what + "; using String");
      return ValueType::string();
    }
    return ValueType::parse(*prim);
  }

  void build_class(const XmlElement& el) {
    ClassDef cls;
    cls.name = name_of(el);
    for (const auto& child : el.children) {
      const auto& c = *child;
      if (c.local == "ownedAttribute") {
        if (c.plain("association")) continue;  // association end, handled with the association
        AttributeDef a;
        a.name = name_of(c);
        auto t = resolve_type(c, "attribute " + cls.name + "." + a.name);
        a.type = t ? *t : ValueType::string();
        cls.attributes.push_back(std::move(a));
      } else if (c.local == "ownedOperation") {
        cls.methods.push_back(build_operation(c, cls.name));
      } else if (c.local == "generalization") {
        build_generalization(c, cls.name);
      } else {
        warn(c, "skipped element '" + c.local + "' in class " + cls.name);
      }
    }
    out_.model.classes.push_back(std::move(cls));
  }

  MethodDef build_operation(const XmlElement& el, const std::string& cls) {
    MethodDef m;
    m.name = name_of(el);
    if (const auto* s = el.plain("isStatic")) m.is_static = (*s == "true");
    for (const auto& child : el.children) {
      const auto& p = *child;
      if (p.local != "ownedParameter") continue;
      const auto* dir = p.plain("direction");
      auto what = "parameter of " + cls + "." + m.name;
      if (dir && *dir == "return") {
        m.returns = resolve_type(p, "return " + what);
        continue;
      }
      auto t = resolve_type(p, what);
      m.params.push_back({name_of(p), t ? *t : ValueType::string()});
    }
    return m;
  }

  void build_generalization(const XmlElement& el, const std::string& sub) {
    std::optional<std::string> general;
    if (const auto* g = el.plain("general")) general = *g;
    for (const auto& c : el.children)
      if (c->local == "general")
        if (const auto* r = c->prefixed("idref")) general = *r;
    if (!general) throw IngestError(IngestErrorKind::UnresolvableIdref, "generalization of " + sub + " has no target");
    auto it = class_ids_.find(*general);
    if (it == class_ids_.end())
      throw IngestError(IngestErrorKind::UnresolvableIdref,
                        "generalization of " + sub + " references unknown xmi:id '" + *general + "'");
    out_.model.generalizations.push_back({sub, it->second});
  }

  static std::string bound_value(const XmlElement& prop, std::string_view which) {
    for (const auto& c : prop.children)
      if (c->local == which)
        if (const auto* v = c->plain("value")) return *v;
    return {};
  }

  static std::string multiplicity(const XmlElement& prop) {
    auto lo = bound_value(prop, "lowerValue");
    auto hi = bound_value(prop, "upperValue");
    bool optional_lower = (lo == "0");
    bool many = (hi == "*" || hi == "-1" || (!hi.empty() && hi != "0" && hi != "1"));
    if (many) return optional_lower ? "0..*" : "1..*";
    return optional_lower ? "0..1" : "1";
  }

  void build_association(const XmlElement& el) {
    const auto name = name_of(el);
    std::vector<std::string> ends;
    if (const auto* me = el.plain("memberEnd")) {
      std::string cur;
      for (char ch : *me + " ") {
        if (std::isspace(static_cast<unsigned char>(ch))) {
          if (!cur.empty()) ends.push_back(cur);
          cur.clear();
        } else {
          cur += ch;
        }
      }
    }
    for (const auto& c : el.children)
      if (c->local == "memberEnd")
        if (const auto* r = c->prefixed("idref")) ends.push_back(*r);
    if (ends.size() != 2) {
      warn(el, "skipped association '" + name + "' with " + std::to_string(ends.size()) + " member ends");
      return;
    }
    const XmlElement* props[2];
    std::string types[2];
    for (int i = 0; i < 2; ++i) {
      auto it = properties_.find(ends[i]);
      if (it == properties_.end())
        throw IngestError(IngestErrorKind::UnresolvableIdref,
                          "association '" + name + "' references unknown member end '" + ends[i] + "'");
      props[i] = it->second;
      auto ref = type_ref(*props[i]);
      auto cls = ref ? class_ids_.find(*ref) : class_ids_.end();
      if (cls == class_ids_.end())
        throw IngestError(IngestErrorKind::UnresolvableIdref,
                          "member end '" + ends[i] + "' of association '" + name + "' does not reference a class");
      types[i] = cls->second;
    }
    auto composite = [](const XmlElement* p) {
      const auto* agg = p->plain("aggregation");
      return agg && *agg == "composite";
    };
    int from = 0;
    RelationDef rel;
    if (composite(props[0]) != composite(props[1])) {
      rel.kind = RelationKind::Composition;
      from = composite(props[0]) ? 1 : 0;  // the composite-marked end is the part
    } else if (ends[0].rfind("EAID_dst", 0) == 0 && ends[1].rfind("EAID_src", 0) == 0) {
      from = 1;
    }
    int to = 1 - from;
    rel.from = types[from];
    rel.to = types[to];
    rel.from_mult = multiplicity(*props[from]);
    rel.to_mult = multiplicity(*props[to]);
    rel.id = is_relation_id(name) ? name : std::string();
    out_.model.relations.push_back(std::move(rel));
  }

  void assign_relation_ids() {
    std::set<std::string> used;
    for (auto& r : out_.model.relations) {
      if (r.id.empty()) continue;
      if (!used.insert(r.id).second) r.id.clear();
    }
    int next = 1;
    for (auto& r : out_.model.relations) {
      if (!r.id.empty()) continue;
      while (used.count("R" + std::to_string(next))) ++next;
      r.id = "R" + std::to_string(next);
      used.insert(r.id);
    }
  }

  XmiImport out_;
  std::vector<const XmlElement*> classes_;
  std::vector<const XmlElement*> associations_;
  std::map<std::string, std::string> class_ids_;
  std::map<std::string, const XmlElement*> properties_;
};

}  // namespace

XmiImport import_xmi(std::string_view text) {
  auto root = parse_xml(text);
  return XmiImporter().run(*root);
}

}  // namespace xanim
