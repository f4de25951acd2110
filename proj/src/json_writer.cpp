#include "xanim/json_writer.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace xanim {

namespace {

struct Decimal {
  bool negative = false;
  std::string digits;  // no leading or trailing zeros; "0" for zero
  int point = 0;       // value = 0.digits * 10^point
};

Decimal shortest_decimal(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite real");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));
  Decimal d;
  if (!s.empty() && s.front() == '-') {
    d.negative = true;
    s.remove_prefix(1);
  }
  auto e = s.find('e');
  std::string_view mantissa = s.substr(0, e);
  int exponent = 0;
  std::from_chars(s.data() + e + 1 + (s[e + 1] == '+' ? 1 : 0), s.data() + s.size(), exponent);
  for (char c : mantissa)
    if (c != '.') d.digits.push_back(c);
  while (d.digits.size() > 1 && d.digits.back() == '0') d.digits.pop_back();
  d.point = exponent + 1;
  return d;
}

std::string fixed_notation(const Decimal& d) {
  std::string out = d.negative ? "-" : "";
  const int n = static_cast<int>(d.digits.size());
  if (d.digits == "0") return out + "0.0";
  if (d.point <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-d.point), '0');
    out += d.digits;
  } else if (d.point >= n) {
    out += d.digits;
    out.append(static_cast<std::size_t>(d.point - n), '0');
    out += ".0";
  } else {
    out += d.digits.substr(0, static_cast<std::size_t>(d.point));
    out += '.';
    out += d.digits.substr(static_cast<std::size_t>(d.point));
  }
  return out;
}

}  // namespace

std::string format_real(double v) {
  Decimal d = shortest_decimal(v);
  if (d.digits == "0" || (d.point > -4 && d.point <= 16)) return fixed_notation(d);
  std::string out = d.negative ? "-" : "";
  out += d.digits[0];
  if (d.digits.size() > 1) {
    out += '.';
    out += d.digits.substr(1);
  }
  int exp = d.point - 1;
  out += exp < 0 ? "e-" : "e+";
  std::string mag = std::to_string(exp < 0 ? -exp : exp);
  if (mag.size() < 2) mag.insert(0, "0");
  return out + mag;
}

std::string format_real_fixed(double v) { return fixed_notation(shortest_decimal(v)); }

void append_json_string(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  out += '"';
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out += kHex[c >> 4];
          out += kHex[c & 0xF];
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void JsonWriter::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_ += ',';
    first_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  separate();
  out_ += '{';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separate();
  out_ += '[';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
  separate();
  append_json_string(out_, k);
  out_ += ':';
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::string(std::string_view s) {
  separate();
  append_json_string(out_, s);
  return *this;
}

JsonWriter& JsonWriter::integer(std::int64_t v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::unsigned_integer(std::uint64_t v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::real(double v) {
  separate();
  out_ += format_real(v);
  return *this;
}

JsonWriter& JsonWriter::boolean(bool v) {
  separate();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::null() {
  separate();
  out_ += "null";
  return *this;
}

JsonWriter& JsonWriter::raw(std::string_view json) {
  separate();
  out_ += json;
  return *this;
}

JsonWriter& JsonWriter::optional_id(const std::optional<InstanceId>& id) {
  return id ? unsigned_integer(*id) : null();
}

JsonWriter& JsonWriter::value(const Value& v) {
  begin_object();
  key("t").string(value_tag(v.kind()));
  key("v");
  switch (v.kind()) {
    case ValueKind::Integer: integer(v.as_integer()); break;
    case ValueKind::Real: real(v.as_real()); break;
    case ValueKind::Boolean: boolean(v.as_boolean()); break;
    case ValueKind::String: string(v.as_string()); break;
    case ValueKind::Handle: optional_id(v.as_handle().id); break;
    case ValueKind::Set:
      begin_array();
      for (auto id : v.as_set().ids) unsigned_integer(id);
      end_array();
      break;
  }
  return end_object();
}

std::string value_to_json(const Value& v) {
  JsonWriter w;
  w.value(v);
  return w.take();
}

}  // namespace xanim
