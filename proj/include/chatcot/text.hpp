#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chatcot::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
bool contains_icase(std::string_view haystack, std::string_view needle);

/// True if needle occurs in haystack (case-insensitive) bounded by
/// non-alphanumeric characters or the ends of the string.
bool contains_word_icase(std::string_view haystack, std::string_view needle);

/// Content of the last \boxed{...} (or \fbox{...}) span with balanced
/// braces; nullopt when there is none or it never closes.
std::optional<std::string> last_boxed(std::string_view s);

bool has_boxed(std::string_view s);

std::size_t whitespace_token_count(std::string_view s) noexcept;

std::vector<std::string> split(std::string_view s, char sep);

} // namespace chatcot::text
