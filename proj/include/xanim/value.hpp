#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace xanim {

using InstanceId = std::uint64_t;

/// Reference to an object instance; an empty id is the `none` handle.
struct Handle {
  std::optional<InstanceId> id;

  friend bool operator==(const Handle&, const Handle&) = default;
};

/// Duplicate-free, ascending list of instance ids.
struct InstanceSet {
  std::vector<InstanceId> ids;

  friend bool operator==(const InstanceSet&, const InstanceSet&) = default;
};

enum class ValueKind { Integer, Real, Boolean, String, Handle, Set };

/// A runtime value of the action language.
class Value {
 public:
  using Storage = std::variant<std::int64_t, double, bool, std::string, Handle, InstanceSet>;

  Value() : storage_(Handle{}) {}

  static Value integer(std::int64_t v) { return Value(Storage(std::in_place_index<0>, v)); }
  static Value real(double v) { return Value(Storage(std::in_place_index<1>, v)); }
  static Value boolean(bool v) { return Value(Storage(std::in_place_index<2>, v)); }
  static Value string(std::string v) { return Value(Storage(std::in_place_index<3>, std::move(v))); }
  static Value handle(std::optional<InstanceId> id) { return Value(Storage(Handle{id})); }
  static Value none() { return handle(std::nullopt); }
  static Value set(std::vector<InstanceId> ids);

  ValueKind kind() const { return static_cast<ValueKind>(storage_.index()); }
  bool is(ValueKind k) const { return kind() == k; }

  std::int64_t as_integer() const { return std::get<0>(storage_); }
  double as_real() const { return std::get<1>(storage_); }
  bool as_boolean() const { return std::get<2>(storage_); }
  const std::string& as_string() const { return std::get<3>(storage_); }
  const Handle& as_handle() const { return std::get<4>(storage_); }
  const InstanceSet& as_set() const { return std::get<5>(storage_); }

  const Storage& storage() const { return storage_; }

  friend bool operator==(const Value& a, const Value& b) { return a.storage_ == b.storage_; }

 private:
  explicit Value(Storage s) : storage_(std::move(s)) {}

  Storage storage_;
};

/// Tag used in the tagged JSON form: int, real, bool, str, handle, set.
std::string_view value_tag(ValueKind k);

/// Human-readable kind name for diagnostics.
std::string_view value_kind_name(ValueKind k);

/// Declared type of an attribute, parameter or return value.
struct ValueType {
  enum class Kind { Integer, Real, Boolean, String, Instance };

  Kind kind = Kind::Integer;
  std::string class_name;  // set only for Kind::Instance

  static ValueType integer() { return {Kind::Integer, {}}; }
  static ValueType real() { return {Kind::Real, {}}; }
  static ValueType boolean() { return {Kind::Boolean, {}}; }
  static ValueType string() { return {Kind::String, {}}; }
  static ValueType instance_of(std::string cls) { return {Kind::Instance, std::move(cls)}; }

  /// Primitive names map to primitives; anything else is taken as a class name.
  static ValueType parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const ValueType&, const ValueType&) = default;
};

bool is_primitive_type_name(std::string_view name);

}  // namespace xanim
