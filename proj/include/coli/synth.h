#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coli/corpus.h"

namespace coli {

// Synthetic code-mixed corpus whose tags follow from word shape:
// English stems are en, Kannada-like stems with Kannada suffixes are kn,
// English stems with Kannada suffixes are kn-en, and names and places carry
// their own suffix sets.
struct SynthOptions {
  size_t sentences = 2000;
  size_t raw_comments = 0;  // 0 means the same as `sentences`
  uint64_t seed = 1;
  bool noise = true;  // duplicates, Kannada-script lines, short lines, emoji
};

struct SynthCorpus {
  std::vector<std::string> raw_lines;
  AnnotatedDataset dataset;
};

SynthCorpus generate_synthetic(const SynthOptions& opts);

void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path);

}  // namespace coli
