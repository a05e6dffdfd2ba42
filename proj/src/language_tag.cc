#include "coli/language_tag.h"

namespace coli {

namespace {
constexpr std::array<std::string_view, kNumTags> kNames = {"kn",   "en",       "kn-en",
                                                           "name", "location", "other"};
}

std::string_view to_string(LanguageTag t) { return kNames[tag_index(t)]; }

std::optional<LanguageTag> parse_tag(std::string_view s) {
  for (size_t i = 0; i < kNumTags; ++i) {
    if (kNames[i] == s) return static_cast<LanguageTag>(i);
  }
  return std::nullopt;
}

}  // namespace coli
