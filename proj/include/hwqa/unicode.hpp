#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace hwqa::unicode {

// Canonical composition (NFC) of UTF-8 input. Ill-formed sequences are
// replaced with U+FFFD before normalization.
std::string nfc(std::string_view utf8);

// Full Unicode lowercase mapping (root locale).
std::string lower(std::string_view utf8);

bool is_whitespace(char32_t cp);

std::size_t codepoint_count(std::string_view utf8);

// Code point range [begin, end) of `utf8`; nullopt when out of range.
std::optional<std::string_view> codepoint_slice(std::string_view utf8, std::size_t begin, std::size_t end);

}  // namespace hwqa::unicode
