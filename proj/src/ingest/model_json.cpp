#include <set>

#include "xanim/ingest.hpp"

namespace xanim {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view ingest_error_kind_name(IngestErrorKind k) {
  switch (k) {
    case IngestErrorKind::MalformedDocument: return "malformed-document";
    case IngestErrorKind::SchemaViolation: return "schema-violation";
    case IngestErrorKind::ValidationFailure: return "validation-failure";
    case IngestErrorKind::MalformedXml: return "malformed-xml";
    case IngestErrorKind::UnresolvableIdref: return "unresolvable-idref";
    case IngestErrorKind::DuplicateMethodEntry: return "duplicate-method-entry";
    case IngestErrorKind::NoBindings: return "no-bindings";
  }
  return "?";
}

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw IngestError(IngestErrorKind::SchemaViolation, where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) schema(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) schema(where, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

const json& array_field(const json& obj, const char* key, const std::string& where, bool required) {
  static const json kEmpty = json::array();
  if (!obj.contains(key)) {
    if (required) schema(where, std::string("missing field '") + key + "'");
    return kEmpty;
  }
  const auto& v = obj.at(key);
  if (!v.is_array()) schema(where, std::string("field '") + key + "' must be an array");
  return v;
}

void require_object(const json& v, const std::string& where) {
  if (!v.is_object()) schema(where, "must be an object");
}

MethodDef read_method(const json& j, const std::string& where) {
  require_object(j, where);
  MethodDef m;
  m.name = string_field(j, "name", where);
  const std::string here = where + "." + m.name;
  if (j.contains("static")) {
    if (!j.at("static").is_boolean()) schema(here, "field 'static' must be a boolean");
    m.is_static = j.at("static").get<bool>();
  }
  for (const auto& p : array_field(j, "params", here, false)) {
    require_object(p, here + " parameter");
    m.params.push_back({string_field(p, "name", here), ValueType::parse(string_field(p, "type", here))});
  }
  if (j.contains("returns") && !j.at("returns").is_null()) {
    if (!j.at("returns").is_string()) schema(here, "field 'returns' must be a string or null");
    m.returns = ValueType::parse(j.at("returns").get<std::string>());
  }
  return m;
}

}  // namespace

ClassModel load_model_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError(IngestErrorKind::MalformedDocument,
                      "malformed model document at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) schema("model", "document must be a JSON object");
  ClassModel m;
  for (const auto& c : array_field(doc, "classes", "model", true)) {
    require_object(c, "class");
    ClassDef cls;
    cls.name = string_field(c, "name", "class");
    const std::string where = "class " + cls.name;
    for (const auto& a : array_field(c, "attributes", where, false)) {
      require_object(a, where + " attribute");
      cls.attributes.push_back({string_field(a, "name", where), ValueType::parse(string_field(a, "type", where))});
    }
    for (const auto& meth : array_field(c, "methods", where, false)) cls.methods.push_back(read_method(meth, where));
    m.classes.push_back(std::move(cls));
  }
  for (const auto& r : array_field(doc, "relations", "model", true)) {
    require_object(r, "relation");
    RelationDef rel;
    rel.id = string_field(r, "id", "relation");
    const std::string where = "relation " + rel.id;
    auto kind = string_field(r, "kind", where);
    if (kind == "association")
      rel.kind = RelationKind::Association;
    else if (kind == "composition")
      rel.kind = RelationKind::Composition;
    else
      schema(where, "kind must be 'association' or 'composition'");
    rel.from = string_field(r, "from", where);
    rel.to = string_field(r, "to", where);
    rel.from_mult = string_field(r, "fromMult", where);
    rel.to_mult = string_field(r, "toMult", where);
    m.relations.push_back(std::move(rel));
  }
  for (const auto& g : array_field(doc, "generalizations", "model", true)) {
    require_object(g, "generalization");
    m.generalizations.push_back({string_field(g, "sub", "generalization"), string_field(g, "super", "generalization")});
  }
  auto diags = validate_model(m);
  if (!diags.empty()) {
    std::string msg = "model failed validation: " + diags.front().message;
    if (diags.size() > 1) msg += " (and " + std::to_string(diags.size() - 1) + " more)";
    throw IngestError(IngestErrorKind::ValidationFailure, msg, std::move(diags));
  }
  return m;
}

ordered_json model_to_json(const ClassModel& m) {
  ordered_json doc;
  doc["classes"] = ordered_json::array();
  for (const auto& c : m.classes) {
    ordered_json cls;
    cls["name"] = c.name;
    cls["attributes"] = ordered_json::array();
    for (const auto& a : c.attributes) cls["attributes"].push_back({{"name", a.name}, {"type", a.type.name()}});
    cls["methods"] = ordered_json::array();
    for (const auto& meth : c.methods) {
      ordered_json mj;
      mj["name"] = meth.name;
      mj["static"] = meth.is_static;
      mj["params"] = ordered_json::array();
      for (const auto& p : meth.params) mj["params"].push_back({{"name", p.name}, {"type", p.type.name()}});
      mj["returns"] = meth.returns ? ordered_json(meth.returns->name()) : ordered_json(nullptr);
      cls["methods"].push_back(std::move(mj));
    }
    doc["classes"].push_back(std::move(cls));
  }
  doc["relations"] = ordered_json::array();
  for (const auto& r : m.relations) {
    ordered_json rj;
    rj["id"] = r.id;
    rj["kind"] = relation_kind_name(r.kind);
    rj["from"] = r.from;
    rj["to"] = r.to;
    rj["fromMult"] = r.from_mult;
    rj["toMult"] = r.to_mult;
    doc["relations"].push_back(std::move(rj));
  }
  doc["generalizations"] = ordered_json::array();
  for (const auto& g : m.generalizations) doc["generalizations"].push_back({{"sub", g.sub}, {"super", g.super}});
  return doc;
}

std::string save_model_json(const ClassModel& m) { return model_to_json(m).dump(2) + "\n"; }

}  // namespace xanim
