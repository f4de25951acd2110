#include "xanim/value.hpp"

#include <algorithm>

namespace xanim {

Value Value::set(std::vector<InstanceId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return Value(Storage(InstanceSet{std::move(ids)}));
}

std::string_view value_tag(ValueKind k) {
  switch (k) {
    case ValueKind::Integer: return "int";
    case ValueKind::Real: return "real";
    case ValueKind::Boolean: return "bool";
    case ValueKind::String: return "str";
    case ValueKind::Handle: return "handle";
    case ValueKind::Set: return "set";
  }
  return "?";
}

std::string_view value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Integer: return "Integer";
    case ValueKind::Real: return "Real";
    case ValueKind::Boolean: return "Boolean";
    case ValueKind::String: return "String";
    case ValueKind::Handle: return "instance handle";
    case ValueKind::Set: return "instance set";
  }
  return "?";
}

bool is_primitive_type_name(std::string_view name) {
  return name == "Integer" || name == "Real" || name == "Boolean" || name == "String";
}

ValueType ValueType::parse(std::string_view name) {
  if (name == "Integer") return integer();
  if (name == "Real") return real();
  if (name == "Boolean") return boolean();
  if (name == "String") return string();
  return instance_of(std::string(name));
}

std::string ValueType::name() const {
  switch (kind) {
    case Kind::Integer: return "Integer";
    case Kind::Real: return "Real";
    case Kind::Boolean: return "Boolean";
    case Kind::String: return "String";
    case Kind::Instance: return class_name;
  }
  return {};
}

}  // namespace xanim
