#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factcheck::text {

std::string_view trim(std::string_view s);
bool is_blank(std::string_view s);

/// ASCII-only lowercasing; bytes >= 0x80 pass through untouched.
std::string ascii_lower(std::string_view s);

/// Case-insensitive (ASCII) search for `needle` in `haystack` starting at
/// `from`. Returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

/// Splits a predicate identifier into lowercase words. camelCase humps,
/// underscores, hyphens, whitespace and other ASCII punctuation all act as
/// boundaries; "HTMLParser" splits as "html parser".
std::vector<std::string> identifier_words(std::string_view identifier);

/// Registry key: identifier words joined by '_' ("eatType", "eat type" and
/// "eat_type" all map to "eat_type").
std::string predicate_key(std::string_view predicate);

/// Identifier words joined by ' ' ("numberOfPages" -> "number of pages").
std::string humanize(std::string_view predicate);

std::string join(std::span<const std::string> parts, std::string_view sep);

}  // namespace factcheck::text
