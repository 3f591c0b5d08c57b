// Canonical JSON writer: keys sorted (nlohmann::json keeps objects in a
// std::map), two-space indent, reals printed with six decimals.
#pragma once

#include "json_io.hpp"

#include <string>

namespace bridgewatch::detail {

std::string canonical_dump(const json& value);

/// Formats a real with six decimals, never producing "-0.000000".
std::string fixed6(double v);

}  // namespace bridgewatch::detail
