#include "coli/bpe.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "coli/binary_io.h"
#include "coli/error.h"
#include "coli/unicode.h"

namespace coli {

namespace {

std::string pair_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back(' ');
  key.append(right);
  return key;
}

std::vector<std::string> initial_symbols(std::string_view word) {
  std::vector<std::string> symbols;
  symbols.emplace_back(kWordBoundary);
  for (auto& cp : unicode::codepoints(word)) symbols.push_back(std::move(cp));
  return symbols;
}

// Merges every non-overlapping occurrence of (left, right), left to right.
bool merge_in_place(std::vector<std::string>& symbols, const std::string& left,
                    const std::string& right) {
  bool changed = false;
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
      changed = true;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
  return changed;
}

using Pair = BpeModel::Merge;

struct PairRank {
  bool operator()(const std::pair<uint64_t, Pair>& a, const std::pair<uint64_t, Pair>& b) const {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  }
};

class PairTable {
 public:
  void add(const Pair& p, int64_t delta, size_t word) {
    uint64_t& count = counts_[p];
    if (count > 0) queue_.erase({count, p});
    count = static_cast<uint64_t>(static_cast<int64_t>(count) + delta);
    if (count > 0) queue_.insert({count, p});
    if (delta > 0) words_[p].insert(word);
  }

  void add_word(const std::vector<std::string>& symbols, int64_t freq, size_t word) {
    for (size_t i = 0; i + 1 < symbols.size(); ++i) add({symbols[i], symbols[i + 1]}, freq, word);
  }

  bool empty() const { return queue_.empty(); }
  const std::pair<uint64_t, Pair>& best() const { return *queue_.begin(); }
  std::vector<size_t> words_with(const Pair& p) const {
    auto it = words_.find(p);
    if (it == words_.end()) return {};
    return {it->second.begin(), it->second.end()};
  }

 private:
  std::map<Pair, uint64_t> counts_;
  std::map<Pair, std::set<size_t>> words_;
  std::set<std::pair<uint64_t, Pair>, PairRank> queue_;
};

}  // namespace

std::string strip_marker(std::string_view piece) {
  std::string out;
  out.reserve(piece.size());
  size_t pos = 0;
  while (pos < piece.size()) {
    if (piece.compare(pos, kWordBoundary.size(), kWordBoundary) == 0) {
      pos += kWordBoundary.size();
    } else {
      out.push_back(piece[pos++]);
    }
  }
  return out;
}

BpeModel::BpeModel(size_t vocab_size, std::vector<std::string> alphabet, std::vector<Merge> merges)
    : vocab_size_(vocab_size), alphabet_(std::move(alphabet)), merges_(std::move(merges)) {
  if (alphabet_.size() + merges_.size() > vocab_size_) {
    throw std::invalid_argument("merge count exceeds vocab_size - |alphabet|");
  }
  for (const auto& sym : alphabet_) {
    if (!vocab_.emplace(sym, static_cast<uint32_t>(vocab_.size())).second) {
      throw std::invalid_argument("duplicate alphabet symbol '" + sym + "'");
    }
  }
  for (size_t i = 0; i < merges_.size(); ++i) {
    const auto& [left, right] = merges_[i];
    if (!vocab_.count(left) || !vocab_.count(right)) {
      throw std::invalid_argument("merge " + std::to_string(i) + " uses an unknown symbol");
    }
    vocab_.emplace(left + right, static_cast<uint32_t>(vocab_.size()));
    rank_.emplace(pair_key(left, right), i);
  }
}

Segmentation BpeModel::segment(std::string_view word) const {
  std::vector<std::string> symbols = initial_symbols(word);
  while (symbols.size() > 1) {
    size_t best_rank = SIZE_MAX;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it != rank_.end()) best_rank = std::min(best_rank, it->second);
    }
    if (best_rank == SIZE_MAX) break;
    merge_in_place(symbols, merges_[best_rank].first, merges_[best_rank].second);
  }
  if (symbols.size() > 1 && symbols.front() == kWordBoundary) symbols.erase(symbols.begin());
  return {std::string(word), std::move(symbols)};
}

BpeModel train_bpe(const std::vector<Sentence>& sentences, size_t vocab_size,
                   std::vector<uint64_t>* merge_counts) {
  std::map<std::string, uint64_t> word_freq;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) ++word_freq[t];
  }
  if (word_freq.empty()) throw std::invalid_argument("cannot train BPE on an empty corpus");

  std::vector<std::vector<std::string>> words;
  std::vector<int64_t> freqs;
  std::set<std::string> alphabet_set;
  for (const auto& [w, f] : word_freq) {
    words.push_back(initial_symbols(w));
    freqs.push_back(static_cast<int64_t>(f));
    alphabet_set.insert(words.back().begin(), words.back().end());
  }
  std::vector<std::string> alphabet(alphabet_set.begin(), alphabet_set.end());
  if (vocab_size <= alphabet.size()) {
    throw std::invalid_argument("vocab_size " + std::to_string(vocab_size) +
                                " must exceed the base alphabet size " +
                                std::to_string(alphabet.size()));
  }

  PairTable table;
  for (size_t w = 0; w < words.size(); ++w) table.add_word(words[w], freqs[w], w);

  std::vector<Pair> merges;
  const size_t max_merges = vocab_size - alphabet.size();
  while (merges.size() < max_merges && !table.empty()) {
    const auto [count, pair] = table.best();
    if (count < 2) break;
    merges.push_back(pair);
    if (merge_counts) merge_counts->push_back(count);
    for (size_t w : table.words_with(pair)) {
      std::vector<std::string> updated = words[w];
      if (!merge_in_place(updated, pair.first, pair.second)) continue;
      table.add_word(words[w], -freqs[w], w);
      words[w] = std::move(updated);
      table.add_word(words[w], freqs[w], w);
    }
  }
  return BpeModel(vocab_size, std::move(alphabet), std::move(merges));
}

std::string format_bpe(const BpeModel& model) {
  std::ostringstream out;
  out << "bpe v1 " << model.vocab_size() << "\n";
  out << "alphabet " << model.alphabet().size() << "\n";
  for (const auto& sym : model.alphabet()) out << sym << "\n";
  out << "merges " << model.merges().size() << "\n";
  for (const auto& [left, right] : model.merges()) out << left << " " << right << "\n";
  return out.str();
}

BpeModel parse_bpe(std::string_view text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      throw FormatError("bpe model: truncated final line");
    }
    lines.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  size_t next = 0;
  auto line = [&]() -> const std::string& {
    if (next >= lines.size()) throw FormatError("bpe model: truncated file");
    return lines[next++];
  };

  std::istringstream header(line());
  std::string magic, version;
  size_t vocab_size = 0;
  if (!(header >> magic >> version >> vocab_size) || magic != "bpe") {
    throw FormatError("bpe model: bad header");
  }
  if (version != "v1") throw FormatError("bpe model: unsupported version " + version);

  auto section = [&](std::string_view name) {
    std::istringstream ss(line());
    std::string tag;
    size_t n = 0;
    if (!(ss >> tag >> n) || tag != name) {
      throw FormatError("bpe model: expected '" + std::string(name) + " <count>'");
    }
    return n;
  };

  const size_t n_alpha = section("alphabet");
  std::vector<std::string> alphabet;
  for (size_t i = 0; i < n_alpha; ++i) {
    const std::string& sym = line();
    if (sym.empty()) throw FormatError("bpe model: empty alphabet symbol");
    alphabet.push_back(sym);
  }
  const size_t n_merges = section("merges");
  std::vector<BpeModel::Merge> merges;
  for (size_t i = 0; i < n_merges; ++i) {
    const std::string& l = line();
    const size_t sp = l.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 == l.size() ||
        l.find(' ', sp + 1) != std::string::npos) {
      throw FormatError("bpe model: malformed merge '" + l + "'");
    }
    merges.emplace_back(l.substr(0, sp), l.substr(sp + 1));
  }
  if (next != lines.size()) throw FormatError("bpe model: trailing data");
  try {
    return BpeModel(vocab_size, std::move(alphabet), std::move(merges));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("bpe model: ") + e.what());
  }
}

void save_bpe(const BpeModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, format_bpe(model));
}

BpeModel load_bpe(const std::filesystem::path& path) { return parse_bpe(read_file(path)); }

}  // namespace coli
