#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "coli/bpe.h"

namespace coli {

struct FeatureTemplate {
  std::vector<size_t> affix_lengths = {1, 2, 3};
  std::vector<size_t> word_ngram_sizes = {2, 3, 5};
  std::vector<size_t> subword_ngram_sizes = {1, 2, 3};
  std::string boundary_marker = "_";

  // Throws std::invalid_argument on empty sets or zero sizes.
  void validate() const;

  bool operator==(const FeatureTemplate&) const = default;
};

// Namespaced feature -> count; never stores zero counts. Names are
// "prefix:", "suffix:", "wng:" or "swng:" followed by the escaped text.
using SparseFeatureVector = std::map<std::string, uint32_t>;

// Percent-escapes '%', ':' and ',' so the namespace separator never
// appears inside a feature body.
std::string escape_feature(std::string_view text);

SparseFeatureVector extract_features(const std::string& word, const BpeModel& bpe,
                                     const FeatureTemplate& tmpl);

// "word<TAB>feature:count,..." debugging line.
std::string format_feature_dump(const std::string& word, const SparseFeatureVector& fv);

// Sparse row: sorted unique column indices with their values.
struct SparseRow {
  std::vector<uint32_t> index;
  std::vector<double> value;
};

class FeatureVocabulary {
 public:
  FeatureVocabulary() = default;
  explicit FeatureVocabulary(std::vector<std::string> sorted_features);

  size_t size() const { return features_.size(); }
  const std::vector<std::string>& features() const { return features_; }
  // -1 when absent.
  int64_t find(const std::string& feature) const;

  bool operator==(const FeatureVocabulary& o) const { return features_ == o.features_; }

 private:
  std::vector<std::string> features_;
  std::unordered_map<std::string, uint32_t> index_;
};

// Column order is the sorted feature strings. Throws on empty input.
FeatureVocabulary fit_vocabulary(const std::vector<SparseFeatureVector>& training_features);

// Unknown features are dropped.
SparseRow vectorize(const SparseFeatureVector& fv, const FeatureVocabulary& vocab);

}  // namespace coli
