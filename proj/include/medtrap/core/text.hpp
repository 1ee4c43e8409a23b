/// @file text.hpp
/// @brief String helpers shared by guards, lookups and tokenizers.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace medtrap::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lowercases, trims and collapses runs of whitespace to one space.
std::string normalize(std::string_view s);

/// Case-insensitive containment after normalize() on both sides.
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Case-insensitive whole-word containment (ASCII word characters).
bool contains_word_ci(std::string_view haystack, std::string_view word);

/// Body of a JSON string literal for `s`, without the surrounding quotes.
std::string json_escape(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Decodes UTF-8 into code points; invalid bytes decode as U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);

bool is_cjk(char32_t cp);

/// Strips trailing sentence punctuation and surrounding quotes.
std::string strip_sentence(std::string_view s);

}  // namespace medtrap::text
