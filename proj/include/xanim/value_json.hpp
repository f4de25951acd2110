#pragma once

#include <string_view>
#include <vector>

#include "json.hpp"
#include "xanim/value.hpp"

namespace xanim {

/// Reads the tagged form {"t":..., "v":...}. Throws std::invalid_argument.
Value value_from_json(const nlohmann::json& j);

/// Parses a JSON array of tagged values, as accepted by `run --args`.
std::vector<Value> values_from_json_text(std::string_view text);

}  // namespace xanim
