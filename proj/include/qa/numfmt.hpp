#pragma once

#include <string>
#include <string_view>

namespace qa {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);
/// Strict parse of a whole string; throws qa::Error("format") otherwise.
double parse_double(std::string_view text);

/// Fixed-point percentage with two decimals, e.g. 0.723 -> "72.30%".
std::string format_percent(double fraction);

}  // namespace qa
