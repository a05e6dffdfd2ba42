#include <gtest/gtest.h>

#include "coli/features.h"
#include "coli/random.h"
#include "coli/unicode.h"

namespace coli {
namespace {

std::set<std::string> with_prefix(const SparseFeatureVector& fv, const std::string& ns) {
  std::set<std::string> out;
  for (const auto& [name, count] : fv) {
    if (name.rfind(ns, 0) == 0) out.insert(name.substr(ns.size()));
  }
  return out;
}

// Total count of word n-grams of exactly n codepoints.
size_t ngram_total(const SparseFeatureVector& fv, size_t n) {
  size_t total = 0;
  for (const auto& [name, count] : fv) {
    if (name.rfind("wng:", 0) == 0 && unicode::length(name.substr(4)) == n) total += count;
  }
  return total;
}

TEST(FeaturesTest, AffixesOfNayigalige) {
  const auto fv = extract_features("nayigalige", BpeModel{}, FeatureTemplate{});
  EXPECT_EQ(with_prefix(fv, "prefix:"), (std::set<std::string>{"n", "na", "nay"}));
  EXPECT_EQ(with_prefix(fv, "suffix:"), (std::set<std::string>{"e", "ge", "ige"}));
}

TEST(FeaturesTest, ShortWordsSkipLongAffixes) {
  const auto fv = extract_features("ok", BpeModel{}, FeatureTemplate{});
  EXPECT_EQ(with_prefix(fv, "prefix:"), (std::set<std::string>{"o", "ok"}));
  // "_ok_" has no 5-grams.
  EXPECT_EQ(ngram_total(fv, 5), 0u);
  EXPECT_EQ(ngram_total(fv, 3), 2u);
}

TEST(FeaturesTest, LowercasesAndEscapes) {
  const auto fv = extract_features("A:b", BpeModel{}, FeatureTemplate{});
  EXPECT_TRUE(fv.count("prefix:a"));
  EXPECT_TRUE(fv.count("prefix:a%3A"));
  for (const auto& [name, count] : fv) {
    const std::string body = name.substr(name.find(':') + 1);
    EXPECT_EQ(body.find(':'), std::string::npos);
    EXPECT_EQ(body.find(','), std::string::npos);
  }
  EXPECT_EQ(escape_feature("%,:"), "%25%2C%3A");
}

TEST(FeaturesTest, NgramCountsOnRandomWords) {
  Rng rng(12);
  const std::vector<std::string> letters = {"a", "b", "g", "k", "l", "\xE0\xB2\x95", "\xC3\xA9"};
  FeatureTemplate tmpl;
  tmpl.word_ngram_sizes = {1, 2, 3, 4, 5, 6};
  for (int i = 0; i < 1000; ++i) {
    std::string w;
    const size_t L = 1 + rng.below(9);
    for (size_t k = 0; k < L; ++k) w += letters[rng.below(letters.size())];
    const auto fv = extract_features(w, BpeModel{}, tmpl);
    for (size_t n : tmpl.word_ngram_sizes) {
      const size_t expected = L + 3 > n ? L + 3 - n : 0;
      ASSERT_EQ(ngram_total(fv, n), expected) << w << " n=" << n;
    }
  }
}

TEST(FeaturesTest, SubwordNgramsUseBpePieces) {
  const BpeModel bpe(10, {std::string(kWordBoundary), "a", "l", "i"}, {{"l", "l"}, {"a", "ll"}});
  FeatureTemplate tmpl;
  tmpl.subword_ngram_sizes = {1};
  const auto fv = extract_features("alli", bpe, tmpl);
  // Pieces: "all", "i" -> unigrams over "_all_" and "_i_".
  EXPECT_EQ(fv.at("swng:_"), 4u);
  EXPECT_EQ(fv.at("swng:l"), 2u);
}

TEST(FeaturesTest, TemplateValidation) {
  FeatureTemplate t;
  EXPECT_NO_THROW(t.validate());
  t.affix_lengths = {0, 1};
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = FeatureTemplate{};
  t.word_ngram_sizes.clear();
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(FeaturesTest, VocabularyAndVectorize) {
  FeatureTemplate tmpl;
  tmpl.subword_ngram_sizes = {2, 3};
  const auto a = extract_features("baruthe", BpeModel{}, tmpl);
  const auto b = extract_features("super", BpeModel{}, tmpl);
  const auto vocab = fit_vocabulary({a, b});
  EXPECT_TRUE(std::is_sorted(vocab.features().begin(), vocab.features().end()));
  const auto row = vectorize(a, vocab);
  EXPECT_EQ(row.index.size(), a.size());
  EXPECT_TRUE(std::is_sorted(row.index.begin(), row.index.end()));
  // Unseen features are dropped, not an error.
  const auto unseen = vectorize(extract_features("zzz", BpeModel{}, tmpl), vocab);
  EXPECT_TRUE(unseen.index.empty());
  EXPECT_THROW(fit_vocabulary({}), std::invalid_argument);
}

TEST(FeaturesTest, DumpFormat) {
  const SparseFeatureVector fv = {{"prefix:n", 1}, {"wng:_n", 2}};
  EXPECT_EQ(format_feature_dump("n", fv), "n\tprefix:n:1,wng:_n:2");
}

}  // namespace
}  // namespace coli
