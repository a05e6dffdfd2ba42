#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "coli/corpus.h"
#include "coli/error.h"
#include "coli/random.h"
#include "coli/unicode.h"

namespace coli {
namespace {

std::vector<RawComment> comments(std::initializer_list<const char*> texts) {
  std::vector<RawComment> out;
  size_t i = 0;
  for (const char* t : texts) out.push_back({t, "test:" + std::to_string(++i)});
  return out;
}

std::vector<Sentence> as_raw_comments_roundtrip(const std::vector<Sentence>& sentences,
                                                const PreprocessOptions& opts) {
  std::vector<RawComment> again;
  for (const auto& s : sentences) {
    std::string line;
    for (const auto& t : s.tokens) line += (line.empty() ? "" : " ") + t;
    again.push_back({line, ""});
  }
  return preprocess(again, opts).sentences;
}

TEST(PreprocessTest, DedupAndLengthFilter) {
  const auto r = preprocess(comments({"good", "good", "nim video thumba chennagide"}), {});
  ASSERT_EQ(r.sentences.size(), 1u);
  EXPECT_EQ(r.sentences[0].tokens,
            (std::vector<std::string>{"nim", "video", "thumba", "chennagide"}));
  EXPECT_EQ(r.dropped_duplicate, 1u);
  EXPECT_EQ(r.dropped_short, 1u);
}

TEST(PreprocessTest, DropsKannadaScript) {
  const auto r = preprocess(
      comments({"\xE0\xB2\xA8\xE0\xB2\xBF\xE0\xB2\xAE\xE0\xB3\x8D\xE0\xB2\xAE "
                "\xE0\xB2\xB5\xE0\xB2\xBF\xE0\xB2\xA1\xE0\xB2\xBF\xE0\xB2\xAF\xE0\xB3\x8A "
                "\xE0\xB2\x9A\xE0\xB2\xA8\xE0\xB3\x8D\xE0\xB2\xA8\xE0\xB2\xBE\xE0\xB2\x97\xE0\xB2\xBF\xE0\xB2\xA6\xE0\xB3\x86"}),
      {});
  EXPECT_TRUE(r.sentences.empty());
  EXPECT_EQ(r.dropped_native_script, 1u);
}

TEST(PreprocessTest, EmojiStrippedThenShortDropped) {
  const auto r = preprocess(comments({"super \xF0\x9F\x91\x8D\xF0\x9F\x91\x8D"}), {});
  EXPECT_TRUE(r.sentences.empty());
  EXPECT_EQ(r.dropped_short, 1u);
}

TEST(PreprocessTest, SplitsSentencesAtFinalPunctuation) {
  const auto r = preprocess(comments({"idu tumba chennagide! next video yavaga barutte?"}), {});
  ASSERT_EQ(r.sentences.size(), 2u);
  EXPECT_EQ(r.sentences[0].tokens, (std::vector<std::string>{"idu", "tumba", "chennagide"}));
  EXPECT_EQ(r.sentences[1].tokens.size(), 4u);
}

TEST(PreprocessTest, EnglishOnlyFilterIsOptional) {
  const auto input = comments({"this is very good", "this is thumba good"});
  EXPECT_EQ(preprocess(input, {}).sentences.size(), 2u);
  PreprocessOptions opts;
  opts.english_wordlist = {"this", "is", "very", "good"};
  const auto r = preprocess(input, opts);
  ASSERT_EQ(r.sentences.size(), 1u);
  EXPECT_EQ(r.dropped_english_only, 1u);
}

TEST(PreprocessTest, RejectsZeroMinTokens) {
  PreprocessOptions opts;
  opts.min_tokens = 0;
  EXPECT_THROW(preprocess(comments({"a b c"}), opts), std::invalid_argument);
}

TEST(PreprocessTest, IdempotentAndClean) {
  Rng rng(5);
  const std::vector<std::string> pieces = {
      "nim", "video", "super", "thumba", "chennagide", "\xF0\x9F\x98\x82", "bro.", "!", "\t",
      "\xE0\xB2\xA8\xE0\xB2\xBF", "ok?", "\xE2\x80\x8B", "good", "\n", "kano", "hogi"};
  std::vector<RawComment> input;
  for (size_t i = 0; i < 300; ++i) {
    std::string text;
    const size_t n = rng.below(12);
    for (size_t k = 0; k < n; ++k) text += pieces[rng.below(pieces.size())] + " ";
    input.push_back({text, ""});
  }
  const PreprocessOptions opts;
  const auto once = preprocess(input, opts).sentences;
  EXPECT_EQ(as_raw_comments_roundtrip(once, opts), once);
  for (const auto& s : once) {
    EXPECT_GE(s.tokens.size(), opts.min_tokens);
    for (const auto& tok : s.tokens) {
      for (char32_t cp : unicode::decode(tok).text) {
        EXPECT_FALSE(unicode::is_whitespace(cp));
        EXPECT_FALSE(unicode::is_strippable(cp));
      }
    }
  }
}

TEST(SplitTest, NinetyTenAndHalves) {
  std::vector<Sentence> ten;
  for (int i = 0; i < 10; ++i) ten.push_back({{"s" + std::to_string(i)}});
  const auto a = split_raw_annotation_pool(ten, 0.9, 3);
  EXPECT_EQ(a.raw.size(), 9u);
  EXPECT_EQ(a.pool.size(), 1u);
  const auto b = split_raw_annotation_pool(ten, 0.9, 3);
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_EQ(a.pool, b.pool);

  std::vector<Sentence> four(ten.begin(), ten.begin() + 4);
  const auto c = split_raw_annotation_pool(four, 0.5, 1);
  EXPECT_EQ(c.raw.size(), 2u);
  EXPECT_EQ(c.pool.size(), 2u);
}

TEST(SplitTest, PartitionIsExhaustive) {
  std::vector<Sentence> all;
  for (int i = 0; i < 37; ++i) all.push_back({{"w" + std::to_string(i)}});
  const auto s = split_raw_annotation_pool(all, 0.9, 11);
  std::vector<std::string> seen;
  for (const auto& x : s.raw) seen.push_back(x.tokens[0]);
  for (const auto& x : s.pool) seen.push_back(x.tokens[0]);
  std::sort(seen.begin(), seen.end());
  std::vector<std::string> expected;
  for (const auto& x : all) expected.push_back(x.tokens[0]);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(seen, expected);
}

TEST(SplitTest, Errors) {
  EXPECT_THROW(split_raw_annotation_pool({{{"one"}}}, 0.9, 1), std::invalid_argument);
  EXPECT_THROW(split_raw_annotation_pool({{{"a"}}, {{"b"}}}, 1.0, 1), std::invalid_argument);
}

TEST(DatasetTest, ParsesRecords) {
  const auto ds = parse_dataset("baruthe\tkn\ncoolagiru\tkn-en\n\nsuper\ten\n");
  ASSERT_EQ(ds.sentences().size(), 2u);
  EXPECT_EQ(ds.sentences()[0][0], (AnnotatedToken{"baruthe", LanguageTag::kn}));
  EXPECT_EQ(ds.sentences()[0][1], (AnnotatedToken{"coolagiru", LanguageTag::kn_en}));
  EXPECT_EQ(ds.label_counts()[tag_index(LanguageTag::en)], 1u);
}

TEST(DatasetTest, ErrorsCarryLineNumbers) {
  try {
    parse_dataset("a\tkn\nb\tfr\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  try {
    parse_dataset("a\tkn\n\nb\tc\ten\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_dataset("nosep\n"), FormatError);
}

TEST(DatasetTest, RoundTripsThroughFile) {
  Rng rng(2);
  AnnotatedDataset ds;
  for (int s = 0; s < 20; ++s) {
    AnnotatedSentence sent;
    for (size_t i = 0; i < 1 + rng.below(8); ++i) {
      sent.push_back({"w" + std::to_string(rng.below(50)), kAllTags[rng.below(kNumTags)]});
    }
    ds.add_sentence(sent);
  }
  const auto path = std::filesystem::temp_directory_path() / "coli_corpus_roundtrip.conll";
  write_dataset(ds, path);
  EXPECT_EQ(read_dataset(path), ds);
  EXPECT_EQ(format_dataset(parse_dataset(format_dataset(ds))), format_dataset(ds));
  std::filesystem::remove(path);
}

TEST(StatsTest, PercentagesAndUniqueWords) {
  const auto st = dataset_stats(parse_dataset("a\tkn\nb\tkn\nc\ten\nd\ten\n"));
  EXPECT_DOUBLE_EQ(st.percentages[tag_index(LanguageTag::kn)], 50.0);
  EXPECT_DOUBLE_EQ(st.percentages[tag_index(LanguageTag::en)], 50.0);
  EXPECT_EQ(st.tokens, 4u);
  EXPECT_EQ(st.sentences, 1u);

  const auto rep = dataset_stats(parse_dataset("x\tkn\nx\tkn\n\nx\tkn\n"));
  EXPECT_EQ(rep.unique_words, 1u);
  EXPECT_EQ(dataset_stats(parse_dataset("X\tkn\nx\tkn\n")).unique_words, 2u);
  EXPECT_THROW(dataset_stats(AnnotatedDataset{}), std::invalid_argument);
}

TEST(IngestTest, MissingAndEmptyFiles) {
  EXPECT_THROW(ingest("/nonexistent/coli/raw.txt"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "coli_empty_raw.txt";
  std::ofstream(path).close();
  EXPECT_THROW(ingest(path), EmptyCorpusError);
  std::filesystem::remove(path);
}

TEST(IngestTest, CountsInvalidUtf8) {
  const auto path = std::filesystem::temp_directory_path() / "coli_bad_utf8.txt";
  std::ofstream(path, std::ios::binary) << "ok line here\nbad \xFF byte\n";
  const auto r = ingest(path);
  EXPECT_EQ(r.comments.size(), 2u);
  EXPECT_EQ(r.invalid_utf8, 1u);
  EXPECT_EQ(r.comments[1].source_id.substr(r.comments[1].source_id.size() - 2), ":2");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace coli
