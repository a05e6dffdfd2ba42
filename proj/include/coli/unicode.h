#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace coli::unicode {

struct DecodeResult {
  std::u32string text;
  size_t invalid_sequences = 0;
};

// Decodes UTF-8, replacing each malformed sequence with U+FFFD.
DecodeResult decode(std::string_view utf8);

std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

// Splits a UTF-8 string into one string per codepoint.
std::vector<std::string> codepoints(std::string_view utf8);

size_t length(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_letter(char32_t cp);

// Kannada block, U+0C80..U+0CFF.
bool is_kannada(char32_t cp);

// Emoji, emoji modifiers and joiners, plus general categories
// Cc, Cf, Cs, Co and Cn. Whitespace controls (tab, newline, ...) are not
// included; callers treat them as separators.
bool is_strippable(char32_t cp);

std::string to_lower(std::string_view utf8);

// Replaces invalid UTF-8 with U+FFFD; returns the number of replacements.
size_t sanitize(std::string& utf8);

}  // namespace coli::unicode
