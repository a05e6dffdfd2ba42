#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coli/bpe.h"
#include "coli/corpus.h"
#include "coli/skipgram.h"

namespace coli {

struct MergeLayout {
  size_t word_dim = 200;
  size_t subword_dim = 100;
  size_t char_dim = 30;
  size_t max_subwords = 8;
  size_t max_chars = 10;

  size_t total_dim() const { return word_dim + max_subwords * subword_dim + max_chars * char_dim; }
  size_t subword_offset(size_t slot) const { return word_dim + slot * subword_dim; }
  size_t char_offset(size_t slot) const {
    return word_dim + max_subwords * subword_dim + slot * char_dim;
  }

  bool operator==(const MergeLayout&) const = default;
};

struct MergedVector {
  std::string word;
  std::vector<float> values;
};

// Three skipgram tables plus the segmentation model used to split words
// into sub-words. Immutable once built.
struct EmbeddingSet {
  MergeLayout layout;
  SkipgramTable words;
  SkipgramTable subwords;
  SkipgramTable chars;
  BpeModel bpe;

  bool operator==(const EmbeddingSet&) const = default;
};

struct EmbeddingOptions {
  SkipgramOptions skipgram;
  // Replace max_subwords / max_chars with the maxima observed in the corpus.
  bool layout_from_corpus = false;
};

struct CorpusMaxima {
  size_t max_subwords = 0;
  size_t max_chars = 0;
};

CorpusMaxima corpus_maxima(const std::vector<Sentence>& sentences, const BpeModel& bpe);

// Word table over sentences, sub-word table over the segmented sentences,
// char table over the codepoints of each word.
EmbeddingSet build_embedding_set(const std::vector<Sentence>& raw, const BpeModel& bpe,
                                 MergeLayout layout, const EmbeddingOptions& opts);

// [word | sub-word slots | char slots]; unknown units and unused slots are
// zero, units beyond the slot counts are dropped.
MergedVector merge_vector(const EmbeddingSet& set, const std::string& word);

std::string serialize_embeddings(const EmbeddingSet& set);
EmbeddingSet deserialize_embeddings(std::string_view bytes);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

}  // namespace coli
