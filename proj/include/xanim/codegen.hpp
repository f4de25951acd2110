#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xanim/ingest.hpp"

namespace xanim {

enum class CodegenErrorKind { UnboundBody, InvalidEntry, ParseErrors };

std::string_view codegen_error_kind_name(CodegenErrorKind k);

class CodegenError : public std::runtime_error {
 public:
  CodegenError(CodegenErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  CodegenErrorKind kind() const { return kind_; }

 private:
  CodegenErrorKind kind_;
};

/// Maps model identifiers to Python identifiers. A name gets `_` appended
/// while it is reserved, already emitted, or would be mangled or treated as
/// special by Python.
class NameSanitizer {
 public:
  explicit NameSanitizer(std::set<std::string> reserved);

  /// Python keywords, builtins, modules the program imports and the names of
  /// the embedded helper runtime.
  static NameSanitizer for_python_globals();
  /// Keywords and the helper attributes every generated object carries.
  static NameSanitizer for_python_members();

  std::string sanitize(std::string_view name);

 private:
  bool taken(const std::string& name) const;

  std::set<std::string> reserved_;
  std::set<std::string> emitted_;
};

/// One-off sanitization against the global reserved set.
std::string sanitize_identifier(std::string_view name);

/// Superclasses before subclasses; among ready classes, model order wins.
std::vector<std::string> topo_order_classes(const ClassModel& m);

struct GenOptions {
  /// Methods without a bound body become explicit no-ops. When false they
  /// are an error.
  bool noop_fallback = true;
};

struct GenUnit {
  std::string source;
  std::map<std::string, std::string> name_map;  // model class -> emitted class
  std::optional<MethodKey> entry;
};

/// Translates a fused model into one self-contained Python 3 program. Run
/// directly, the program executes the entry (if any) and prints the final
/// snapshot JSON. It accepts `--args <JSON list of tagged values>` and
/// `--max-steps N`.
GenUnit generate_program(const FusedModel& fused, const std::optional<MethodKey>& entry, GenOptions options = {});

}  // namespace xanim
