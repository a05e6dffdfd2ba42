#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "coli/language_tag.h"

namespace coli {

struct RawComment {
  std::string text;
  std::string source_id;
};

struct Sentence {
  std::vector<std::string> tokens;

  bool operator==(const Sentence&) const = default;
};

struct AnnotatedToken {
  std::string word;
  LanguageTag tag;

  bool operator==(const AnnotatedToken&) const = default;
};

using AnnotatedSentence = std::vector<AnnotatedToken>;

class AnnotatedDataset {
 public:
  AnnotatedDataset() = default;
  explicit AnnotatedDataset(std::vector<AnnotatedSentence> sentences);

  // Throws std::invalid_argument for an empty sentence or an invalid word.
  void add_sentence(AnnotatedSentence sentence);

  const std::vector<AnnotatedSentence>& sentences() const { return sentences_; }
  const std::array<size_t, kNumTags>& label_counts() const { return label_counts_; }
  size_t token_count() const;
  bool empty() const { return sentences_.empty(); }

  bool operator==(const AnnotatedDataset& other) const { return sentences_ == other.sentences_; }

 private:
  std::vector<AnnotatedSentence> sentences_;
  std::array<size_t, kNumTags> label_counts_{};
};

struct IngestResult {
  std::vector<RawComment> comments;
  size_t invalid_utf8 = 0;  // replaced byte sequences
};

// One comment per non-blank line. Throws IoError for a missing file and
// EmptyCorpusError when no comment survives.
IngestResult ingest(const std::filesystem::path& path);

struct PreprocessOptions {
  size_t min_tokens = 3;
  double native_script_threshold = 0.8;
  // Comments whose every token (lowercased) is in this set are removed.
  // Empty set disables the filter.
  std::unordered_set<std::string> english_wordlist;
};

struct PreprocessResult {
  std::vector<Sentence> sentences;
  size_t dropped_duplicate = 0;
  size_t dropped_native_script = 0;
  size_t dropped_short = 0;
  size_t dropped_english_only = 0;
};

// Filter chain: strip emoji and unprintable codepoints, drop duplicate,
// native-script, English-only and short comments, split at . ! ? and
// newlines, then apply the same filters to the resulting sentences.
PreprocessResult preprocess(const std::vector<RawComment>& comments, const PreprocessOptions& opts);

std::unordered_set<std::string> load_wordlist(const std::filesystem::path& path);

struct RawPoolSplit {
  std::vector<Sentence> raw;
  std::vector<Sentence> pool;
};

// Deterministic shuffle under seed; |raw| = round(fraction * N). Both halves
// keep input order.
RawPoolSplit split_raw_annotation_pool(const std::vector<Sentence>& sentences, double fraction,
                                       uint64_t seed);

void write_sentences(const std::vector<Sentence>& sentences, const std::filesystem::path& path);
std::vector<Sentence> read_sentences(const std::filesystem::path& path);

AnnotatedDataset parse_dataset(std::string_view text);
std::string format_dataset(const AnnotatedDataset& ds);
AnnotatedDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const AnnotatedDataset& ds, const std::filesystem::path& path);

struct StatsReport {
  std::array<size_t, kNumTags> counts{};
  std::array<double, kNumTags> percentages{};
  size_t sentences = 0;
  size_t tokens = 0;
  size_t unique_words = 0;  // case-sensitive
};

StatsReport dataset_stats(const AnnotatedDataset& ds);
std::string format_stats(const StatsReport& stats);

}  // namespace coli
