#include "coli/classifier.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coli {

Distribution softmax(const std::array<double, kNumTags>& scores) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  Distribution p;
  double sum = 0;
  for (size_t c = 0; c < kNumTags; ++c) {
    p[c] = std::exp(scores[c] - mx);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

LanguageTag argmax(const Distribution& d) {
  size_t best = 0;
  for (size_t c = 1; c < kNumTags; ++c) {
    if (d[c] > d[best]) best = c;
  }
  return static_cast<LanguageTag>(best);
}

void validate_rows(const LabeledRows& data) {
  if (data.rows.size() != data.labels.size()) {
    throw std::invalid_argument("rows and labels differ in length");
  }
  if (data.rows.empty()) throw std::invalid_argument("no training rows");
  for (size_t r = 0; r < data.rows.size(); ++r) {
    const SparseRow& row = data.rows[r];
    if (row.index.size() != row.value.size()) {
      throw std::invalid_argument("row " + std::to_string(r) + ": malformed sparse row");
    }
    for (size_t k = 0; k < row.index.size(); ++k) {
      if (row.index[k] >= data.dim) {
        throw std::invalid_argument("row " + std::to_string(r) + ": column out of range");
      }
      if (!std::isfinite(row.value[k])) {
        throw std::invalid_argument("row " + std::to_string(r) + ": non-finite feature value");
      }
    }
  }
}

namespace {

template <typename T>
SparseRow dense_row_impl(std::span<const T> values) {
  SparseRow row;
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] != T(0)) {
      row.index.push_back(static_cast<uint32_t>(i));
      row.value.push_back(static_cast<double>(values[i]));
    }
  }
  return row;
}

}  // namespace

SparseRow dense_row(std::span<const float> values) { return dense_row_impl(values); }
SparseRow dense_row(std::span<const double> values) { return dense_row_impl(values); }

void warn_missing_classes(const std::vector<LanguageTag>& labels, TrainReport* report) {
  if (!report) return;
  std::array<bool, kNumTags> seen{};
  for (LanguageTag t : labels) seen[tag_index(t)] = true;
  for (LanguageTag t : kAllTags) {
    if (!seen[tag_index(t)]) {
      report->warnings.push_back("class '" + std::string(to_string(t)) +
                                 "' absent from training data");
    }
  }
}

std::array<double, kNumTags> inverse_frequency_weights(const std::vector<LanguageTag>& labels) {
  std::array<size_t, kNumTags> counts{};
  for (LanguageTag t : labels) ++counts[tag_index(t)];
  std::array<double, kNumTags> w{};
  for (size_t c = 0; c < kNumTags; ++c) {
    if (counts[c]) {
      w[c] = static_cast<double>(labels.size()) / (kNumTags * static_cast<double>(counts[c]));
    }
  }
  return w;
}

}  // namespace coli
