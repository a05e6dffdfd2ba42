#include <gtest/gtest.h>

#include "coli/bpe.h"
#include "coli/error.h"
#include "coli/random.h"

namespace coli {
namespace {

const std::string kMark(kWordBoundary);

std::vector<Sentence> toy_corpus() {
  std::vector<Sentence> out;
  for (int i = 0; i < 5; ++i) out.push_back({{"low"}});
  for (int i = 0; i < 2; ++i) out.push_back({{"lower"}});
  out.push_back({{"lowest"}});
  return out;
}

std::string joined(const Segmentation& s) {
  std::string out;
  for (const auto& p : s.sub_words) out += strip_marker(p);
  return out;
}

TEST(BpeTest, ToyCorpusMergeSequence) {
  std::vector<uint64_t> counts;
  const BpeModel m = train_bpe(toy_corpus(), 100, &counts);
  const std::vector<BpeModel::Merge> expected = {{"l", "o"},
                                                 {"lo", "w"},
                                                 {kMark, "low"},
                                                 {kMark + "low", "e"},
                                                 {kMark + "lowe", "r"}};
  EXPECT_EQ(m.merges(), expected);
  EXPECT_EQ(counts, (std::vector<uint64_t>{8, 8, 8, 3, 2}));
  EXPECT_EQ(m.alphabet().size(), 8u);
}

TEST(BpeTest, VocabSizeCapsMerges) {
  const BpeModel m = train_bpe(toy_corpus(), 11);
  EXPECT_EQ(m.merges().size(), 3u);
  EXPECT_EQ(m.segment("lowest").sub_words,
            (std::vector<std::string>{kMark + "low", "e", "s", "t"}));
  EXPECT_EQ(train_bpe(toy_corpus(), 9).merges().size(), 1u);
  EXPECT_THROW(train_bpe(toy_corpus(), 8), std::invalid_argument);
}

TEST(BpeTest, UnseenSymbolsStayAsSingleCodepoints) {
  const BpeModel m = train_bpe(toy_corpus(), 100);
  const auto seg = m.segment("zlowq");
  EXPECT_EQ(joined(seg), "zlowq");
  // No merge joins the marker to "z", so the bare marker is dropped.
  EXPECT_EQ(seg.sub_words.front(), "z");
}

TEST(BpeTest, ConcatenationInvariantOnRandomStrings) {
  std::vector<Sentence> corpus;
  Rng rng(9);
  const std::vector<std::string> alphabet = {"a", "b", "k", "n", "o", "\xE0\xB2\x95", "\xC3\xA9", "_"};
  auto random_word = [&](size_t max_len) {
    std::string w;
    const size_t len = 1 + rng.below(max_len);
    for (size_t i = 0; i < len; ++i) w += alphabet[rng.below(alphabet.size())];
    return w;
  };
  for (int i = 0; i < 300; ++i) corpus.push_back({{random_word(8), random_word(8)}});
  const BpeModel m = train_bpe(corpus, 60);
  for (int i = 0; i < 10000; ++i) {
    const std::string w = random_word(14);
    const auto seg = m.segment(w);
    ASSERT_EQ(joined(seg), w);
    for (const auto& p : seg.sub_words) ASSERT_FALSE(p.empty());
  }
}

TEST(BpeTest, TextFormatRoundTrip) {
  const BpeModel m = train_bpe(toy_corpus(), 12);
  const std::string text = format_bpe(m);
  EXPECT_EQ(text.rfind("bpe v1 12\n", 0), 0u);
  const BpeModel back = parse_bpe(text);
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.vocab(), m.vocab());
  EXPECT_EQ(format_bpe(back), text);
}

TEST(BpeTest, RejectsDamagedFiles) {
  const std::string text = format_bpe(train_bpe(toy_corpus(), 12));
  EXPECT_THROW(parse_bpe(text.substr(0, text.size() - 6)), FormatError);
  EXPECT_THROW(parse_bpe("bpe v9 12\n"), FormatError);
  EXPECT_THROW(parse_bpe(text + "extra line\n"), FormatError);
  EXPECT_THROW(parse_bpe(""), FormatError);
}

TEST(BpeTest, Deterministic) {
  EXPECT_EQ(format_bpe(train_bpe(toy_corpus(), 20)), format_bpe(train_bpe(toy_corpus(), 20)));
}

}  // namespace
}  // namespace coli
