#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qa::text {

/// Lowercased maximal runs of Unicode alphanumeric code points. Invalid UTF-8
/// sequences act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Fixed English function-word list applied to queries (never to the index).
bool is_stopword(std::string_view token);

/// tokenize() followed by stopword removal.
std::vector<std::string> query_tokens(std::string_view text);

}  // namespace qa::text
