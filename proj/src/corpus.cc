#include "coli/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "coli/binary_io.h"
#include "coli/error.h"
#include "coli/random.h"
#include "coli/unicode.h"

namespace coli {

namespace {

bool valid_word(std::string_view w) {
  if (w.empty()) return false;
  for (char32_t cp : unicode::decode(w).text) {
    if (unicode::is_whitespace(cp)) return false;
  }
  return true;
}

bool is_sentence_break(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'\n' || cp == U'\r';
}

// Strips unprintables, splits at sentence breaks, then at whitespace.
std::vector<std::vector<std::string>> clean_and_split(std::string_view text) {
  std::vector<std::vector<std::string>> sentences(1);
  std::u32string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      sentences.back().push_back(unicode::encode(token));
      token.clear();
    }
  };
  for (char32_t cp : unicode::decode(text).text) {
    if (is_sentence_break(cp)) {
      flush_token();
      if (!sentences.back().empty()) sentences.emplace_back();
    } else if (unicode::is_whitespace(cp)) {
      flush_token();
    } else if (!unicode::is_strippable(cp)) {
      token.push_back(cp);
    }
  }
  flush_token();
  if (sentences.back().empty()) sentences.pop_back();
  return sentences;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

double native_fraction(const std::vector<std::string>& tokens) {
  size_t letters = 0;
  size_t native = 0;
  for (const auto& t : tokens) {
    for (char32_t cp : unicode::decode(t).text) {
      if (!unicode::is_letter(cp)) continue;
      ++letters;
      if (unicode::is_kannada(cp)) ++native;
    }
  }
  return letters == 0 ? 0.0 : static_cast<double>(native) / static_cast<double>(letters);
}

bool english_only(const std::vector<std::string>& tokens,
                  const std::unordered_set<std::string>& wordlist) {
  if (wordlist.empty()) return false;
  return std::all_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return wordlist.count(unicode::to_lower(t)) > 0;
  });
}

class FilterChain {
 public:
  FilterChain(const PreprocessOptions& opts, PreprocessResult& result)
      : opts_(opts), result_(result) {}

  bool keep(const std::vector<std::string>& tokens, std::unordered_set<std::string>& seen) {
    if (!seen.insert(join(tokens)).second) {
      ++result_.dropped_duplicate;
      return false;
    }
    if (native_fraction(tokens) >= opts_.native_script_threshold) {
      ++result_.dropped_native_script;
      return false;
    }
    if (english_only(tokens, opts_.english_wordlist)) {
      ++result_.dropped_english_only;
      return false;
    }
    if (tokens.size() < opts_.min_tokens) {
      ++result_.dropped_short;
      return false;
    }
    return true;
  }

 private:
  const PreprocessOptions& opts_;
  PreprocessResult& result_;
};

}  // namespace

AnnotatedDataset::AnnotatedDataset(std::vector<AnnotatedSentence> sentences) {
  for (auto& s : sentences) add_sentence(std::move(s));
}

void AnnotatedDataset::add_sentence(AnnotatedSentence sentence) {
  if (sentence.empty()) throw std::invalid_argument("empty sentence");
  for (const auto& tok : sentence) {
    if (!valid_word(tok.word)) throw std::invalid_argument("invalid word '" + tok.word + "'");
  }
  for (const auto& tok : sentence) ++label_counts_[tag_index(tok.tag)];
  sentences_.push_back(std::move(sentence));
}

size_t AnnotatedDataset::token_count() const {
  size_t n = 0;
  for (size_t c : label_counts_) n += c;
  return n;
}

IngestResult ingest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  IngestResult out;
  const std::string source = path.filename().string();
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.invalid_utf8 += unicode::sanitize(line);
    const bool blank = std::all_of(line.begin(), line.end(),
                                   [](unsigned char c) { return std::isspace(c) != 0; });
    if (blank) continue;
    out.comments.push_back({std::move(line), source + ":" + std::to_string(lineno)});
  }
  if (out.comments.empty()) throw EmptyCorpusError("empty corpus: " + path.string());
  return out;
}

PreprocessResult preprocess(const std::vector<RawComment>& comments, const PreprocessOptions& opts) {
  if (opts.min_tokens < 1) throw std::invalid_argument("min_tokens must be >= 1");
  PreprocessResult result;
  FilterChain chain(opts, result);
  std::unordered_set<std::string> seen_comments;
  std::unordered_set<std::string> seen_sentences;

  for (const auto& comment : comments) {
    auto sentences = clean_and_split(comment.text);
    std::vector<std::string> all_tokens;
    for (const auto& s : sentences) all_tokens.insert(all_tokens.end(), s.begin(), s.end());
    if (!chain.keep(all_tokens, seen_comments)) continue;
    for (auto& s : sentences) {
      if (chain.keep(s, seen_sentences)) result.sentences.push_back({std::move(s)});
    }
  }
  return result;
}

std::unordered_set<std::string> load_wordlist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open wordlist " + path.string());
  std::unordered_set<std::string> words;
  std::string w;
  while (in >> w) words.insert(unicode::to_lower(w));
  return words;
}

RawPoolSplit split_raw_annotation_pool(const std::vector<Sentence>& sentences, double fraction,
                                       uint64_t seed) {
  const size_t n = sentences.size();
  if (n < 2) throw std::invalid_argument("need at least 2 sentences to split");
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("fraction must be in (0, 1)");

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_raw = static_cast<size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<bool> in_raw(n, false);
  for (size_t i = 0; i < n_raw; ++i) in_raw[order[i]] = true;

  RawPoolSplit out;
  for (size_t i = 0; i < n; ++i) (in_raw[i] ? out.raw : out.pool).push_back(sentences[i]);
  return out;
}

void write_sentences(const std::vector<Sentence>& sentences, const std::filesystem::path& path) {
  std::string text;
  for (const auto& s : sentences) {
    text += join(s.tokens);
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    unicode::sanitize(line);
    Sentence s;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) s.tokens.push_back(tok);
    if (!s.tokens.empty()) out.push_back(std::move(s));
  }
  return out;
}

AnnotatedDataset parse_dataset(std::string_view text) {
  AnnotatedDataset ds;
  AnnotatedSentence current;
  size_t lineno = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      if (!current.empty()) ds.add_sentence(std::move(current));
      current.clear();
      continue;
    }
    const std::string where = "line " + std::to_string(lineno) + ": ";
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError(where + "expected 'word<TAB>tag'");
    if (line.find('\t', tab + 1) != std::string_view::npos) {
      throw FormatError(where + "token contains a tab");
    }
    std::string word(line.substr(0, tab));
    if (unicode::sanitize(word) > 0) throw FormatError(where + "invalid UTF-8");
    if (!valid_word(word)) throw FormatError(where + "empty word or word with whitespace");
    const auto tag = parse_tag(line.substr(tab + 1));
    if (!tag) {
      throw FormatError(where + "unknown tag '" + std::string(line.substr(tab + 1)) + "'");
    }
    current.push_back({std::move(word), *tag});
  }
  if (!current.empty()) ds.add_sentence(std::move(current));
  return ds;
}

std::string format_dataset(const AnnotatedDataset& ds) {
  std::string out;
  bool first = true;
  for (const auto& sentence : ds.sentences()) {
    if (!first) out += '\n';
    first = false;
    for (const auto& tok : sentence) {
      out += tok.word;
      out += '\t';
      out += to_string(tok.tag);
      out += '\n';
    }
  }
  return out;
}

AnnotatedDataset read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

void write_dataset(const AnnotatedDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, format_dataset(ds));
}

StatsReport dataset_stats(const AnnotatedDataset& ds) {
  if (ds.empty()) throw std::invalid_argument("empty dataset");
  StatsReport r;
  r.counts = ds.label_counts();
  r.sentences = ds.sentences().size();
  r.tokens = ds.token_count();
  std::unordered_set<std::string> unique;
  for (const auto& s : ds.sentences()) {
    for (const auto& t : s) unique.insert(t.word);
  }
  r.unique_words = unique.size();
  for (size_t i = 0; i < kNumTags; ++i) {
    r.percentages[i] = 100.0 * static_cast<double>(r.counts[i]) / static_cast<double>(r.tokens);
  }
  return r;
}

std::string format_stats(const StatsReport& stats) {
  std::ostringstream out;
  out << "sentences\t" << stats.sentences << "\n"
      << "tokens\t" << stats.tokens << "\n"
      << "unique_words\t" << stats.unique_words << "\n";
  out << std::fixed << std::setprecision(2);
  for (LanguageTag t : kAllTags) {
    out << to_string(t) << "\t" << stats.counts[tag_index(t)] << "\t"
        << stats.percentages[tag_index(t)] << "%\n";
  }
  return out.str();
}

}  // namespace coli
