#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xanim/value.hpp"

namespace xanim {

/// Python `repr(float)` formatting: shortest round-trip digits, fixed
/// notation for decimal exponents in (-4, 16], scientific otherwise.
/// Only finite values are accepted.
std::string format_real(double v);

/// Shortest round-trip digits in plain fixed notation, always with a
/// fractional part (`1.0`, `0.001`, `12300000000000000000000.0`).
std::string format_real_fixed(double v);

/// Appends `s` as a JSON string literal. Escapes quote, backslash and
/// control characters; every other byte is copied verbatim.
void append_json_string(std::string& out, std::string_view s);

/// Single-line JSON emitter with caller-controlled key order. Output bytes
/// are fully determined by the call sequence.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& string(std::string_view s);
  JsonWriter& integer(std::int64_t v);
  JsonWriter& unsigned_integer(std::uint64_t v);
  JsonWriter& real(double v);
  JsonWriter& boolean(bool v);
  JsonWriter& null();
  /// Inserts pre-serialized JSON.
  JsonWriter& raw(std::string_view json);

  /// Tagged value form, e.g. {"t":"int","v":3}.
  JsonWriter& value(const Value& v);
  JsonWriter& optional_id(const std::optional<InstanceId>& id);

  const std::string& str() const { return out_; }
  std::string take() { return std::move(out_); }

 private:
  void separate();

  std::string out_;
  std::vector<bool> first_;
  bool after_key_ = false;
};

std::string value_to_json(const Value& v);

}  // namespace xanim
