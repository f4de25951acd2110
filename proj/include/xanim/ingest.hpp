#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xanim/diagnostic.hpp"
#include "xanim/model.hpp"
#include "xanim/oal/ast.hpp"

namespace xanim {

enum class IngestErrorKind {
  MalformedDocument,
  SchemaViolation,
  ValidationFailure,
  MalformedXml,
  UnresolvableIdref,
  DuplicateMethodEntry,
  NoBindings,
};

std::string_view ingest_error_kind_name(IngestErrorKind k);

class IngestError : public std::runtime_error {
 public:
  IngestError(IngestErrorKind kind, std::string message, std::vector<Diagnostic> diagnostics = {})
      : std::runtime_error(std::move(message)), kind_(kind), diagnostics_(std::move(diagnostics)) {}

  IngestErrorKind kind() const { return kind_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  IngestErrorKind kind_;
  std::vector<Diagnostic> diagnostics_;
};

// ---- Model JSON -------------------------------------------------------------

/// Parses and validates a Model JSON document.
ClassModel load_model_json(std::string_view text);

/// Canonical field order; keys appear exactly as load_model_json reads them.
nlohmann::ordered_json model_to_json(const ClassModel& m);

/// model_to_json rendered with two-space indentation and a trailing newline.
std::string save_model_json(const ClassModel& m);

// ---- XMI 2.1 ----------------------------------------------------------------

struct XmiImport {
  ClassModel model;
  std::vector<Diagnostic> warnings;  // skipped elements, guessed types
};

/// Imports the class-diagram subset of an XMI 2.1 document as exported by
/// Enterprise Architect. Element names match on local name, whatever prefix.
XmiImport import_xmi(std::string_view text);

// ---- Method bundles and fusion ---------------------------------------------

struct MethodEntry {
  std::string class_name;
  std::string method;
  std::string code;
};

struct MethodBundle {
  std::vector<MethodEntry> entries;
};

MethodBundle load_method_bundle(std::string_view text);
std::string save_method_bundle(const MethodBundle& b);

struct MethodKey {
  std::string class_name;
  std::string method;

  friend auto operator<=>(const MethodKey&, const MethodKey&) = default;
};

struct BodyDiagnostic {
  MethodKey key;
  Diagnostic diagnostic;
};

/// A class model with method bodies bound to it.
struct FusedModel {
  ClassModel model;
  std::map<MethodKey, oal::MethodAst> bodies;
  std::map<MethodKey, std::string> sources;
  std::vector<MethodKey> unbound;             // bundle entries naming unknown classes or methods
  std::vector<BodyDiagnostic> diagnostics;    // parse failures of bound entries

  const oal::MethodAst* body(std::string_view cls, std::string_view method) const;
  bool has_parse_errors() const;
};

/// Binds each bundle entry to the class that declares the method and parses
/// its code. Unknown targets are recorded, not rejected; fusion only fails
/// when a non-empty bundle binds nothing at all.
FusedModel fuse(ClassModel m, const MethodBundle& b);

}  // namespace xanim
