#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coli/corpus.h"
#include "coli/ensemble.h"
#include "coli/language_tag.h"

namespace coli {

// Rows are gold tags, columns predictions.
struct ConfusionMatrix {
  std::array<std::array<uint64_t, kNumTags>, kNumTags> counts{};

  void add(LanguageTag gold, LanguageTag predicted) {
    ++counts[tag_index(gold)][tag_index(predicted)];
  }
  uint64_t total() const;
  uint64_t gold_count(size_t c) const;
  uint64_t predicted_count(size_t c) const;

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const LanguageTag> gold,
                                 std::span<const LanguageTag> predicted);

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  uint64_t support = 0;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumTags> per_class{};
  // Unweighted means over all six classes; zero-support classes count as 0.
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;

  std::vector<LanguageTag> zero_support() const;
};

MetricsReport compute_metrics(const ConfusionMatrix& cm);

struct Evaluation {
  MetricsReport metrics;
  ConfusionMatrix confusion;
};

// Throws std::invalid_argument on an empty test set.
Evaluation evaluate(const Tagger& model, const AnnotatedDataset& test);

struct TrainTestSplit {
  AnnotatedDataset train;
  AnnotatedDataset test;
};

// Sentence-level shuffle under `seed`, then the first round(f * N) sentences
// become the training split. Throws when either side would be empty.
TrainTestSplit split_train_test(const AnnotatedDataset& ds, double train_fraction, uint64_t seed);

struct ModelResult {
  std::string model;
  MetricsReport metrics;
};

// Three tab-separated sections (macro, class_f1, per_class), values to two
// decimals. Throws on an empty result list.
std::string format_report_tsv(std::span<const ModelResult> results);
std::string format_report_text(std::span<const ModelResult> results);

// Inverse of format_report_tsv; throws FormatError on malformed input.
std::vector<ModelResult> parse_report_tsv(std::string_view text);

}  // namespace coli
