#include "coli/embeddings.h"

#include <algorithm>
#include <unordered_map>

#include "coli/binary_io.h"
#include "coli/error.h"
#include "coli/unicode.h"

namespace coli {

namespace {

constexpr std::string_view kMagic = "CMEB";
constexpr uint32_t kVersion = 1;

void copy_block(const float* src, size_t n, float* dst) {
  if (src) std::copy(src, src + n, dst);
}

void write_table(BinaryWriter& w, const SkipgramTable& t) {
  w.u32(static_cast<uint32_t>(t.size()));
  w.u32(static_cast<uint32_t>(t.dim()));
  for (const auto& tok : t.tokens()) w.str(tok);
  w.f32s(t.data());
}

SkipgramTable read_table(BinaryReader& r, size_t expected_dim, std::string_view name) {
  const uint32_t count = r.u32();
  const uint32_t dim = r.u32();
  if (dim != expected_dim) {
    throw FormatError("embeddings: " + std::string(name) + " table dim " + std::to_string(dim) +
                      " does not match header " + std::to_string(expected_dim));
  }
  std::vector<std::string> tokens;
  tokens.reserve(count);
  for (uint32_t i = 0; i < count; ++i) tokens.push_back(r.str());
  std::vector<float> data(static_cast<size_t>(count) * dim);
  r.f32s(data);
  try {
    return SkipgramTable(std::move(tokens), dim, std::move(data));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("embeddings: ") + e.what());
  }
}

}  // namespace

CorpusMaxima corpus_maxima(const std::vector<Sentence>& sentences, const BpeModel& bpe) {
  CorpusMaxima m;
  std::unordered_map<std::string, bool> seen;
  for (const auto& s : sentences) {
    for (const auto& w : s.tokens) {
      if (!seen.emplace(w, true).second) continue;
      m.max_subwords = std::max(m.max_subwords, bpe.segment(w).sub_words.size());
      m.max_chars = std::max(m.max_chars, unicode::length(w));
    }
  }
  return m;
}

EmbeddingSet build_embedding_set(const std::vector<Sentence>& raw, const BpeModel& bpe,
                                 MergeLayout layout, const EmbeddingOptions& opts) {
  if (raw.empty()) throw std::invalid_argument("embeddings: empty raw corpus");
  if (opts.layout_from_corpus) {
    const CorpusMaxima m = corpus_maxima(raw, bpe);
    layout.max_subwords = m.max_subwords;
    layout.max_chars = m.max_chars;
  }

  std::unordered_map<std::string, std::vector<std::string>> segment_cache;
  std::vector<std::vector<std::string>> word_seqs;
  std::vector<std::vector<std::string>> subword_seqs;
  std::vector<std::vector<std::string>> char_seqs;
  for (const auto& s : raw) {
    word_seqs.push_back(s.tokens);
    std::vector<std::string> pieces;
    for (const auto& w : s.tokens) {
      auto it = segment_cache.find(w);
      if (it == segment_cache.end()) it = segment_cache.emplace(w, bpe.segment(w).sub_words).first;
      pieces.insert(pieces.end(), it->second.begin(), it->second.end());
      char_seqs.push_back(unicode::codepoints(w));
    }
    subword_seqs.push_back(std::move(pieces));
  }

  EmbeddingSet set;
  set.layout = layout;
  set.bpe = bpe;
  SkipgramOptions sg = opts.skipgram;
  set.words = train_skipgram(word_seqs, layout.word_dim, sg);
  sg.seed = opts.skipgram.seed + 1;
  set.subwords = train_skipgram(subword_seqs, layout.subword_dim, sg);
  sg.seed = opts.skipgram.seed + 2;
  set.chars = train_skipgram(char_seqs, layout.char_dim, sg);
  return set;
}

MergedVector merge_vector(const EmbeddingSet& set, const std::string& word) {
  const MergeLayout& L = set.layout;
  MergedVector mv{word, std::vector<float>(L.total_dim(), 0.0f)};
  float* out = mv.values.data();

  copy_block(set.words.find(word), L.word_dim, out);

  const auto pieces = set.bpe.segment(word).sub_words;
  for (size_t i = 0; i < std::min(pieces.size(), L.max_subwords); ++i) {
    copy_block(set.subwords.find(pieces[i]), L.subword_dim, out + L.subword_offset(i));
  }
  const auto chars = unicode::codepoints(word);
  for (size_t i = 0; i < std::min(chars.size(), L.max_chars); ++i) {
    copy_block(set.chars.find(chars[i]), L.char_dim, out + L.char_offset(i));
  }
  return mv;
}

std::string serialize_embeddings(const EmbeddingSet& set) {
  BinaryWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  const MergeLayout& L = set.layout;
  for (size_t v : {L.word_dim, L.subword_dim, L.char_dim, L.max_subwords, L.max_chars}) {
    w.u32(static_cast<uint32_t>(v));
  }
  write_table(w, set.words);
  write_table(w, set.subwords);
  write_table(w, set.chars);
  w.str(format_bpe(set.bpe));
  return w.bytes();
}

EmbeddingSet deserialize_embeddings(std::string_view bytes) {
  BinaryReader r(bytes);
  r.expect_magic(kMagic);
  const uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError("embeddings: unsupported version " + std::to_string(version));
  }
  EmbeddingSet set;
  MergeLayout& L = set.layout;
  L.word_dim = r.u32();
  L.subword_dim = r.u32();
  L.char_dim = r.u32();
  L.max_subwords = r.u32();
  L.max_chars = r.u32();
  set.words = read_table(r, L.word_dim, "word");
  set.subwords = read_table(r, L.subword_dim, "sub-word");
  set.chars = read_table(r, L.char_dim, "char");
  set.bpe = parse_bpe(r.str());
  r.expect_end();
  return set;
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_embeddings(set));
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return deserialize_embeddings(read_file(path));
}

}  // namespace coli
