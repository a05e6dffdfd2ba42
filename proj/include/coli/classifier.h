#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "coli/features.h"
#include "coli/language_tag.h"

namespace coli {

// Probability over the six tags, in kAllTags order.
using Distribution = std::array<double, kNumTags>;

Distribution softmax(const std::array<double, kNumTags>& scores);

// Index of the largest entry; the earliest class wins ties.
LanguageTag argmax(const Distribution& d);

struct LabeledRows {
  std::vector<SparseRow> rows;
  std::vector<LanguageTag> labels;
  size_t dim = 0;
};

// Throws std::invalid_argument on size mismatch, out-of-range columns or
// non-finite values (naming the row).
void validate_rows(const LabeledRows& data);

// Non-zero entries of a dense vector.
SparseRow dense_row(std::span<const float> values);
SparseRow dense_row(std::span<const double> values);

struct TrainReport {
  std::vector<std::string> warnings;
  std::vector<double> epoch_loss;
  size_t epochs_run = 0;
};

// Warns for each class absent from the labels.
void warn_missing_classes(const std::vector<LanguageTag>& labels, TrainReport* report);

// Inverse-frequency weights N / (C * n_c); absent classes get 0.
std::array<double, kNumTags> inverse_frequency_weights(const std::vector<LanguageTag>& labels);

}  // namespace coli
