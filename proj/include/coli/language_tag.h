#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace coli {

enum class LanguageTag : uint8_t { kn = 0, en, kn_en, name, location, other };

inline constexpr size_t kNumTags = 6;

inline constexpr std::array<LanguageTag, kNumTags> kAllTags = {
    LanguageTag::kn,   LanguageTag::en,       LanguageTag::kn_en,
    LanguageTag::name, LanguageTag::location, LanguageTag::other};

inline constexpr size_t tag_index(LanguageTag t) { return static_cast<size_t>(t); }

std::string_view to_string(LanguageTag t);
std::optional<LanguageTag> parse_tag(std::string_view s);

}  // namespace coli
