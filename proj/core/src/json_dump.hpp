#pragma once

#include <string>

#include <json.hpp>

namespace hs::detail {

/// Serializes like ordered_json::dump(indent) but prints floating-point
/// values with 17 significant digits.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

}  // namespace hs::detail
