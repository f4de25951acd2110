#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xanim/diagnostic.hpp"
#include "xanim/value.hpp"

namespace xanim {

struct AttributeDef {
  std::string name;
  ValueType type;

  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

struct ParamDef {
  std::string name;
  ValueType type;

  friend bool operator==(const ParamDef&, const ParamDef&) = default;
};

struct MethodDef {
  std::string name;
  bool is_static = false;
  std::vector<ParamDef> params;
  std::optional<ValueType> returns;

  friend bool operator==(const MethodDef&, const MethodDef&) = default;
};

struct ClassDef {
  std::string name;
  std::vector<AttributeDef> attributes;
  std::vector<MethodDef> methods;

  const MethodDef* find_method(std::string_view method) const;

  friend bool operator==(const ClassDef&, const ClassDef&) = default;
};

enum class RelationKind { Association, Composition };

struct RelationDef {
  std::string id;
  RelationKind kind = RelationKind::Association;
  std::string from;
  std::string to;
  std::string from_mult = "1";
  std::string to_mult = "1";

  friend bool operator==(const RelationDef&, const RelationDef&) = default;
};

struct Generalization {
  std::string sub;
  std::string super;

  friend bool operator==(const Generalization&, const Generalization&) = default;
};

/// The static layer: classes, relations and single-parent generalizations.
/// Lookup helpers assume a validated model.
struct ClassModel {
  std::vector<ClassDef> classes;
  std::vector<RelationDef> relations;
  std::vector<Generalization> generalizations;

  const ClassDef* find_class(std::string_view name) const;
  const RelationDef* find_relation(std::string_view id) const;
  std::optional<std::string> parent_of(std::string_view cls) const;

  /// `cls` followed by its ancestors, nearest first.
  std::vector<std::string> lineage(std::string_view cls) const;
  bool is_a(std::string_view cls, std::string_view ancestor) const;

  /// Attributes visible on instances of `cls`, root ancestor's first.
  std::vector<AttributeDef> all_attributes(std::string_view cls) const;
  const AttributeDef* find_attribute(std::string_view cls, std::string_view attr) const;

  friend bool operator==(const ClassModel&, const ClassModel&) = default;
};

bool is_identifier(std::string_view s);
bool is_relation_id(std::string_view s);
bool is_multiplicity(std::string_view s);

/// Upper bound of a multiplicity string; nullopt for unbounded.
std::optional<int> multiplicity_upper(std::string_view mult);

std::string_view relation_kind_name(RelationKind k);

/// Every invariant violation of `m`. Empty iff the model is valid.
std::vector<Diagnostic> validate_model(const ClassModel& m);

struct ResolvedMethod {
  std::string owner;
  const MethodDef* method = nullptr;
};

/// Walks the generalization chain upward from `cls` and returns the first
/// class defining `method`.
std::optional<ResolvedMethod> resolve_method(const ClassModel& m, std::string_view cls,
                                             std::string_view method);

Value default_attribute_value(const ValueType& t);

}  // namespace xanim
