#include "coli/unicode.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace coli::unicode {

DecodeResult decode(std::string_view utf8) {
  DecodeResult out;
  out.text.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) {
      out.text.push_back(U'�');
      ++out.invalid_sequences;
    } else {
      out.text.push_back(static_cast<char32_t>(c));
    }
  }
  return out;
}

std::string encode(char32_t cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool err = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, static_cast<UChar32>(cp), err);
  if (err) return "\xEF\xBF\xBD";
  return std::string(buf, len);
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) out += encode(cp);
  return out;
}

std::vector<std::string> codepoints(std::string_view utf8) {
  std::vector<std::string> out;
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) {
      out.emplace_back("\xEF\xBF\xBD");
    } else {
      out.emplace_back(utf8.substr(start, i - start));
    }
  }
  return out;
}

size_t length(std::string_view utf8) {
  size_t count = 0;
  for (unsigned char ch : utf8) {
    if ((ch & 0xC0) != 0x80) ++count;
  }
  return count;
}

bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_letter(char32_t cp) { return u_isUAlphabetic(static_cast<UChar32>(cp)); }

bool is_kannada(char32_t cp) { return cp >= 0x0C80 && cp <= 0x0CFF; }

bool is_strippable(char32_t cp) {
  const auto c = static_cast<UChar32>(cp);
  if (is_whitespace(cp)) return false;
  switch (u_charType(c)) {
    case U_CONTROL_CHAR:
    case U_FORMAT_CHAR:
    case U_SURROGATE:
    case U_PRIVATE_USE_CHAR:
    case U_UNASSIGNED:
      return true;
    default:
      break;
  }
  if (u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC) ||
      u_hasBinaryProperty(c, UCHAR_EMOJI_PRESENTATION) ||
      u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER)) {
    return true;
  }
  // Regional indicators, variation selectors, combining keycap.
  if (cp >= 0x1F1E6 && cp <= 0x1F1FF) return true;
  if (cp == 0xFE0E || cp == 0xFE0F || cp == 0x20E3) return true;
  return false;
}

std::string to_lower(std::string_view utf8) {
  std::u32string text = decode(utf8).text;
  for (char32_t& cp : text) cp = static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
  return encode(text);
}

size_t sanitize(std::string& utf8) {
  DecodeResult d = decode(utf8);
  if (d.invalid_sequences > 0) utf8 = encode(d.text);
  return d.invalid_sequences;
}

}  // namespace coli::unicode
