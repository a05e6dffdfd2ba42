#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coli/corpus.h"

namespace coli {

// Prefixed to every word before segmentation. U+2581 sorts after ASCII,
// so ties between the marker pair and in-word pairs favour in-word merges.
inline constexpr std::string_view kWordBoundary = "\xE2\x96\x81";

struct Segmentation {
  std::string word;
  // The first piece carries the boundary marker unless it would be a bare
  // marker, in which case the marker is dropped.
  std::vector<std::string> sub_words;
};

// Strips boundary markers from a piece.
std::string strip_marker(std::string_view piece);

class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  BpeModel() = default;
  BpeModel(size_t vocab_size, std::vector<std::string> alphabet, std::vector<Merge> merges);

  Segmentation segment(std::string_view word) const;

  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::unordered_map<std::string, uint32_t>& vocab() const { return vocab_; }
  size_t vocab_size() const { return vocab_size_; }

  bool operator==(const BpeModel& other) const {
    return vocab_size_ == other.vocab_size_ && alphabet_ == other.alphabet_ && merges_ == other.merges_;
  }

 private:
  size_t vocab_size_ = 0;
  std::vector<std::string> alphabet_;
  std::vector<Merge> merges_;
  std::unordered_map<std::string, uint32_t> vocab_;
  std::unordered_map<std::string, size_t> rank_;  // "left right" -> merge index
};

// Greedy BPE: merge the most frequent adjacent pair (ties lexicographic on
// (left, right)) until the vocabulary reaches vocab_size or no pair occurs
// at least twice. When merge_counts is given it receives the frequency of
// each merge at the time it was chosen.
BpeModel train_bpe(const std::vector<Sentence>& sentences, size_t vocab_size,
                   std::vector<uint64_t>* merge_counts = nullptr);

std::string format_bpe(const BpeModel& model);
BpeModel parse_bpe(std::string_view text);
void save_bpe(const BpeModel& model, const std::filesystem::path& path);
BpeModel load_bpe(const std::filesystem::path& path);

}  // namespace coli
