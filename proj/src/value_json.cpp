#include "xanim/value_json.hpp"

#include <stdexcept>

namespace xanim {

namespace {

InstanceId to_id(const nlohmann::json& j) {
  if (!j.is_number_unsigned() || j.get<std::uint64_t>() == 0)
    throw std::invalid_argument("instance id must be a positive integer");
  return j.get<InstanceId>();
}

}  // namespace

Value value_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("t") || !j.contains("v") || !j.at("t").is_string())
    throw std::invalid_argument("value must be an object {\"t\":tag,\"v\":payload}");
  const auto& tag = j.at("t").get_ref<const std::string&>();
  const auto& v = j.at("v");
  if (tag == "int") {
    if (!v.is_number_integer()) throw std::invalid_argument("int value must be an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
      throw std::invalid_argument("int value out of range");
    return Value::integer(v.get<std::int64_t>());
  }
  if (tag == "real") {
    if (!v.is_number()) throw std::invalid_argument("real value must be a number");
    return Value::real(v.get<double>());
  }
  if (tag == "bool") {
    if (!v.is_boolean()) throw std::invalid_argument("bool value must be true or false");
    return Value::boolean(v.get<bool>());
  }
  if (tag == "str") {
    if (!v.is_string()) throw std::invalid_argument("str value must be a string");
    return Value::string(v.get<std::string>());
  }
  if (tag == "handle") {
    if (v.is_null()) return Value::none();
    return Value::handle(to_id(v));
  }
  if (tag == "set") {
    if (!v.is_array()) throw std::invalid_argument("set value must be an array");
    std::vector<InstanceId> ids;
    for (const auto& e : v) ids.push_back(to_id(e));
    return Value::set(std::move(ids));
  }
  throw std::invalid_argument("unknown value tag '" + tag + "'");
}

std::vector<Value> values_from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed value list: ") + e.what());
  }
  if (!j.is_array()) throw std::invalid_argument("value list must be a JSON array");
  std::vector<Value> out;
  for (const auto& e : j) out.push_back(value_from_json(e));
  return out;
}

}  // namespace xanim
