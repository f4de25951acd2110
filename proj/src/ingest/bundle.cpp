#include <set>

#include "xanim/ingest.hpp"
#include "xanim/oal/parser.hpp"

namespace xanim {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw IngestError(IngestErrorKind::MalformedDocument, "malformed method bundle: " + what);
}

std::string entry_string(const json& e, const char* key, size_t index) {
  if (!e.contains(key) || !e.at(key).is_string())
    malformed("entry " + std::to_string(index) + " needs a string field '" + key + "'");
  return e.at(key).get<std::string>();
}

}  // namespace

MethodBundle load_method_bundle(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed("byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("methods") || !doc.at("methods").is_array())
    malformed("expected an object with a 'methods' array");
  MethodBundle b;
  std::set<std::pair<std::string, std::string>> seen;
  size_t index = 0;
  for (const auto& e : doc.at("methods")) {
    if (!e.is_object()) malformed("entry " + std::to_string(index) + " is not an object");
    MethodEntry entry{entry_string(e, "class", index), entry_string(e, "method", index),
                      entry_string(e, "code", index)};
    if (!seen.emplace(entry.class_name, entry.method).second)
      throw IngestError(IngestErrorKind::DuplicateMethodEntry,
                        "duplicate method entry " + entry.class_name + "." + entry.method);
    b.entries.push_back(std::move(entry));
    ++index;
  }
  return b;
}

std::string save_method_bundle(const MethodBundle& b) {
  nlohmann::ordered_json doc;
  doc["methods"] = nlohmann::ordered_json::array();
  for (const auto& e : b.entries)
    doc["methods"].push_back({{"class", e.class_name}, {"method", e.method}, {"code", e.code}});
  return doc.dump(2) + "\n";
}

const oal::MethodAst* FusedModel::body(std::string_view cls, std::string_view method) const {
  auto it = bodies.find(MethodKey{std::string(cls), std::string(method)});
  return it == bodies.end() ? nullptr : &it->second;
}

bool FusedModel::has_parse_errors() const {
  for (const auto& d : diagnostics)
    if (d.diagnostic.severity == Severity::Error) return true;
  return false;
}

FusedModel fuse(ClassModel m, const MethodBundle& b) {
  FusedModel out;
  out.model = std::move(m);
  size_t bound = 0;
  for (const auto& e : b.entries) {
    MethodKey key{e.class_name, e.method};
    const auto* cls = out.model.find_class(e.class_name);
    if (!cls || !cls->find_method(e.method)) {
      out.unbound.push_back(std::move(key));
      continue;
    }
    ++bound;
    auto parsed = oal::parse_method_body(e.code);
    for (auto& d : parsed.diagnostics) out.diagnostics.push_back({key, std::move(d)});
    out.sources[key] = e.code;
    if (parsed.ast) out.bodies.emplace(std::move(key), std::move(*parsed.ast));
  }
  if (bound == 0 && !b.entries.empty())
    throw IngestError(IngestErrorKind::NoBindings, "no method bundle entry binds to the model");
  return out;
}

}  // namespace xanim
