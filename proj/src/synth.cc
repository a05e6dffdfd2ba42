#include "coli/synth.h"

#include <array>
#include <set>
#include <string_view>

#include "coli/binary_io.h"
#include "coli/random.h"
#include "coli/unicode.h"

namespace coli {

namespace {

constexpr std::array<std::string_view, 19> kConsonants = {
    "b", "ch", "d", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "y", "th", "dh", "sh"};
constexpr std::array<std::string_view, 7> kVowels = {"a", "e", "i", "o", "u", "aa", "ee"};

constexpr std::array<std::string_view, 8> kKannadaSuffixes = {"alli", "ige", "inda", "annu",
                                                              "ide",  "odu", "illa", "ona"};
constexpr std::array<std::string_view, 5> kNameSuffixes = {"swamy", "appa", "esh", "amma", "raj"};
constexpr std::array<std::string_view, 5> kPlaceSuffixes = {"pura", "nagar", "kote", "palya", "uru"};

constexpr std::array<std::string_view, 96> kEnglish = {
    "super",   "nice",    "video",   "song",    "movie",   "good",    "very",    "best",
    "thanks",  "please",  "upload",  "channel", "subscribe", "like",  "comment", "share",
    "music",   "actor",   "acting",  "story",   "scene",   "awesome", "great",   "love",
    "happy",   "birthday", "friend", "family",  "watch",   "waiting", "trailer", "release",
    "director", "hero",   "heroine", "fans",    "team",    "work",    "hard",    "today",
    "tomorrow", "morning", "night",  "time",    "people",  "public",  "support", "request",
    "next",    "part",    "episode", "cool",    "simple",  "smart",   "sweet",   "voice",
    "dance",   "style",   "power",   "mass",    "class",   "record",  "first",   "last",
    "always",  "never",   "really",  "nothing", "something", "everything", "better", "worst",
    "funny",   "comedy",  "serial",  "news",    "update",  "phone",   "mobile",  "online",
    "school",  "college", "office",  "market",  "ticket",  "theatre", "screen",  "photo",
    "camera",  "editing", "quality", "budget",  "profit",  "success", "respect", "congrats"};

constexpr std::array<std::string_view, 16> kOtherWords = {
    "hai", "kya", "nahi", "bahut", "accha", "bhai", "yaar", "kuch",
    "mera", "tera", "aur", "bhi", "kaise", "2019", "100", "10k"};

constexpr std::array<double, kNumTags> kPriors = {0.40, 0.30, 0.10, 0.08, 0.06, 0.06};

constexpr std::array<std::string_view, 6> kEmoji = {"\xF0\x9F\x91\x8D", "\xF0\x9F\x98\x8D",
                                                    "\xF0\x9F\x94\xA5", "\xE2\x9D\xA4\xEF\xB8\x8F",
                                                    "\xF0\x9F\x99\x8F", "\xF0\x9F\x98\x82"};

template <typename C>
std::string_view pick(const C& items, Rng& rng) {
  return items[rng.below(items.size())];
}

std::string syllables(size_t n, Rng& rng) {
  std::string s;
  for (size_t i = 0; i < n; ++i) {
    s += pick(kConsonants, rng);
    s += pick(kVowels, rng);
  }
  return s;
}

using Lexicon = std::array<std::vector<std::string>, kNumTags>;

// Draws `count` distinct words from `make`, giving up after a bounded
// number of attempts so tiny generators still terminate.
template <typename F>
std::vector<std::string> distinct(size_t count, std::set<std::string>& used, F make) {
  std::vector<std::string> out;
  for (size_t attempt = 0; out.size() < count && attempt < count * 50; ++attempt) {
    std::string w = make();
    if (used.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

Lexicon build_lexicon(Rng& rng) {
  Lexicon lex;
  std::set<std::string> used;
  for (auto w : kEnglish) used.insert(std::string(w));
  for (auto w : kOtherWords) used.insert(std::string(w));

  auto& en = lex[tag_index(LanguageTag::en)];
  for (auto w : kEnglish) en.emplace_back(w);

  std::vector<std::string> stems;
  std::set<std::string> stem_set;
  while (stems.size() < 120) {
    std::string s = syllables(2, rng);
    if (stem_set.insert(s).second) stems.push_back(std::move(s));
  }
  lex[tag_index(LanguageTag::kn)] = distinct(400, used, [&] {
    return stems[rng.below(stems.size())] + std::string(pick(kKannadaSuffixes, rng));
  });
  lex[tag_index(LanguageTag::kn_en)] = distinct(200, used, [&] {
    return std::string(pick(kEnglish, rng)) + std::string(pick(kKannadaSuffixes, rng));
  });
  lex[tag_index(LanguageTag::name)] = distinct(80, used, [&] {
    std::string w = syllables(1 + rng.below(2), rng) + std::string(pick(kNameSuffixes, rng));
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  });
  lex[tag_index(LanguageTag::location)] = distinct(60, used, [&] {
    std::string w = syllables(2, rng) + std::string(pick(kPlaceSuffixes, rng));
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  });
  auto& other = lex[tag_index(LanguageTag::other)];
  for (auto w : kOtherWords) other.emplace_back(w);
  static constexpr std::string_view kBare = "bcdfghjklmnpqrstvwxz";
  auto rest = distinct(24, used, [&] {
    std::string w;
    const size_t len = 3 + rng.below(3);
    for (size_t i = 0; i < len; ++i) w += kBare[rng.below(kBare.size())];
    return w;
  });
  other.insert(other.end(), rest.begin(), rest.end());
  return lex;
}

size_t draw_class(Rng& rng) {
  double u = rng.uniform();
  for (size_t c = 0; c + 1 < kNumTags; ++c) {
    if (u < kPriors[c]) return c;
    u -= kPriors[c];
  }
  return kNumTags - 1;
}

// Tags are sticky: each word keeps the previous word's class with
// probability 1/2, otherwise redraws from the priors.
AnnotatedSentence make_sentence(const Lexicon& lex, Rng& rng) {
  const size_t len = 4 + rng.below(11);
  AnnotatedSentence s;
  size_t c = draw_class(rng);
  for (size_t i = 0; i < len; ++i) {
    if (i > 0 && rng.uniform() >= 0.5) c = draw_class(rng);
    const auto& words = lex[c];
    s.push_back({words[rng.below(words.size())], kAllTags[c]});
  }
  return s;
}

std::string join_words(const AnnotatedSentence& s) {
  std::string out;
  for (const auto& t : s) {
    if (!out.empty()) out += ' ';
    out += t.word;
  }
  return out;
}

std::string kannada_script_line(Rng& rng) {
  std::string out;
  for (size_t w = 0; w < 4; ++w) {
    if (w) out += ' ';
    for (size_t i = 0; i < 3; ++i) out += unicode::encode(static_cast<char32_t>(0x0C95 + rng.below(0x25)));
  }
  return out;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthOptions& opts) {
  Rng root(opts.seed);
  Rng lex_rng = root.fork(1);
  Rng ds_rng = root.fork(2);
  Rng raw_rng = root.fork(3);
  const Lexicon lex = build_lexicon(lex_rng);

  SynthCorpus out;
  for (size_t i = 0; i < opts.sentences; ++i) out.dataset.add_sentence(make_sentence(lex, ds_rng));

  const size_t comments = opts.raw_comments ? opts.raw_comments : opts.sentences;
  for (size_t i = 0; i < comments; ++i) {
    const double u = opts.noise ? raw_rng.uniform() : 1.0;
    if (u < 0.04 && !out.raw_lines.empty()) {
      out.raw_lines.push_back(out.raw_lines[raw_rng.below(out.raw_lines.size())]);
    } else if (u < 0.07) {
      out.raw_lines.push_back(kannada_script_line(raw_rng));
    } else if (u < 0.10) {
      out.raw_lines.push_back(std::string(pick(kEnglish, raw_rng)) + " " +
                              std::string(pick(kEmoji, raw_rng)));
    } else {
      std::string line = join_words(make_sentence(lex, raw_rng));
      if (raw_rng.uniform() < 0.3) line += ". " + join_words(make_sentence(lex, raw_rng));
      if (u < 0.18) line += " " + std::string(pick(kEmoji, raw_rng));
      out.raw_lines.push_back(std::move(line));
    }
  }
  return out;
}

void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : lines) {
    text += l;
    text += '\n';
  }
  write_file_atomic(path, text);
}

}  // namespace coli
