#include "coli/features.h"

#include <algorithm>
#include <stdexcept>

#include "coli/unicode.h"

namespace coli {

namespace {

std::string concat(const std::vector<std::string>& cps, size_t begin, size_t end) {
  std::string out;
  for (size_t i = begin; i < end; ++i) out += cps[i];
  return out;
}

void add_ngrams(const std::vector<std::string>& marked, const std::vector<size_t>& sizes,
                std::string_view ns, SparseFeatureVector& fv) {
  for (size_t n : sizes) {
    if (n > marked.size()) continue;
    for (size_t i = 0; i + n <= marked.size(); ++i) {
      ++fv[std::string(ns) + escape_feature(concat(marked, i, i + n))];
    }
  }
}

std::vector<std::string> mark(std::vector<std::string> cps, const std::string& marker) {
  cps.insert(cps.begin(), marker);
  cps.push_back(marker);
  return cps;
}

}  // namespace

void FeatureTemplate::validate() const {
  for (const auto* sizes : {&affix_lengths, &word_ngram_sizes, &subword_ngram_sizes}) {
    if (sizes->empty()) throw std::invalid_argument("feature template: empty size set");
    if (std::find(sizes->begin(), sizes->end(), 0u) != sizes->end()) {
      throw std::invalid_argument("feature template: sizes must be >= 1");
    }
  }
}

std::string escape_feature(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '%': out += "%25"; break;
      case ':': out += "%3A"; break;
      case ',': out += "%2C"; break;
      default: out += c;
    }
  }
  return out;
}

SparseFeatureVector extract_features(const std::string& word, const BpeModel& bpe,
                                     const FeatureTemplate& tmpl) {
  const std::string lower = unicode::to_lower(word);
  const std::vector<std::string> cps = unicode::codepoints(lower);
  SparseFeatureVector fv;

  std::vector<size_t> affixes = tmpl.affix_lengths;
  std::sort(affixes.begin(), affixes.end());
  affixes.erase(std::unique(affixes.begin(), affixes.end()), affixes.end());
  for (size_t len : affixes) {
    if (len > cps.size()) continue;
    ++fv["prefix:" + escape_feature(concat(cps, 0, len))];
    ++fv["suffix:" + escape_feature(concat(cps, cps.size() - len, cps.size()))];
  }

  add_ngrams(mark(cps, tmpl.boundary_marker), tmpl.word_ngram_sizes, "wng:", fv);

  for (const auto& piece : bpe.segment(lower).sub_words) {
    const std::string body = strip_marker(piece);
    if (body.empty()) continue;
    add_ngrams(mark(unicode::codepoints(body), tmpl.boundary_marker), tmpl.subword_ngram_sizes,
               "swng:", fv);
  }
  return fv;
}

std::string format_feature_dump(const std::string& word, const SparseFeatureVector& fv) {
  std::string out = word;
  out += '\t';
  bool first = true;
  for (const auto& [name, count] : fv) {
    if (!first) out += ',';
    first = false;
    out += name;
    out += ':';
    out += std::to_string(count);
  }
  return out;
}

FeatureVocabulary::FeatureVocabulary(std::vector<std::string> sorted_features)
    : features_(std::move(sorted_features)) {
  for (size_t i = 0; i < features_.size(); ++i) {
    if (!index_.emplace(features_[i], static_cast<uint32_t>(i)).second) {
      throw std::invalid_argument("feature vocabulary: duplicate feature " + features_[i]);
    }
  }
}

int64_t FeatureVocabulary::find(const std::string& feature) const {
  auto it = index_.find(feature);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

FeatureVocabulary fit_vocabulary(const std::vector<SparseFeatureVector>& training_features) {
  if (training_features.empty()) throw std::invalid_argument("fit_vocabulary: empty input");
  std::vector<std::string> all;
  for (const auto& fv : training_features) {
    for (const auto& [name, count] : fv) all.push_back(name);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return FeatureVocabulary(std::move(all));
}

SparseRow vectorize(const SparseFeatureVector& fv, const FeatureVocabulary& vocab) {
  std::vector<std::pair<uint32_t, double>> cells;
  for (const auto& [name, count] : fv) {
    const int64_t col = vocab.find(name);
    if (col >= 0 && count > 0) cells.emplace_back(static_cast<uint32_t>(col), count);
  }
  std::sort(cells.begin(), cells.end());
  SparseRow row;
  for (const auto& [col, v] : cells) {
    row.index.push_back(col);
    row.value.push_back(v);
  }
  return row;
}

}  // namespace coli
