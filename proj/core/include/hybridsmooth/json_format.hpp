#pragma once

#include <string>
#include <string_view>

namespace hs {

/// Re-serializes JSON text, keeping key order and printing every
/// floating-point number with 17 significant digits.
std::string format_json(std::string_view text, int indent = 2);

}  // namespace hs
