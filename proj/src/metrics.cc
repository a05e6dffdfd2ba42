#include "coli/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "coli/error.h"
#include "coli/random.h"

namespace coli {

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double ratio(uint64_t num, uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) return out;
    start = tab + 1;
  }
}

double parse_number(const std::string& s, size_t line_no) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("report line " + std::to_string(line_no) + ": bad number '" + s + "'");
}

}  // namespace

uint64_t ConfusionMatrix::total() const {
  uint64_t n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), uint64_t{0});
  return n;
}

uint64_t ConfusionMatrix::gold_count(size_t c) const {
  return std::accumulate(counts[c].begin(), counts[c].end(), uint64_t{0});
}

uint64_t ConfusionMatrix::predicted_count(size_t c) const {
  uint64_t n = 0;
  for (const auto& row : counts) n += row[c];
  return n;
}

ConfusionMatrix confusion_matrix(std::span<const LanguageTag> gold,
                                 std::span<const LanguageTag> predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("confusion_matrix: gold and predicted lengths differ");
  }
  ConfusionMatrix cm;
  for (size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], predicted[i]);
  return cm;
}

std::vector<LanguageTag> MetricsReport::zero_support() const {
  std::vector<LanguageTag> out;
  for (size_t c = 0; c < kNumTags; ++c) {
    if (per_class[c].support == 0) out.push_back(kAllTags[c]);
  }
  return out;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  for (size_t c = 0; c < kNumTags; ++c) {
    const uint64_t tp = cm.counts[c][c];
    ClassMetrics& m = r.per_class[c];
    m.support = cm.gold_count(c);
    m.precision = ratio(tp, cm.predicted_count(c));
    m.recall = ratio(tp, m.support);
    m.f1 = m.precision + m.recall > 0
               ? 2 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    r.macro_precision += m.precision / kNumTags;
    r.macro_recall += m.recall / kNumTags;
    r.macro_f1 += m.f1 / kNumTags;
  }
  return r;
}

Evaluation evaluate(const Tagger& model, const AnnotatedDataset& test) {
  if (test.token_count() == 0) throw std::invalid_argument("evaluate: empty test set");
  ConfusionMatrix cm;
  std::vector<std::string> words;
  for (const auto& sentence : test.sentences()) {
    words.clear();
    for (const auto& t : sentence) words.push_back(t.word);
    const auto predicted = tag_words(model, words);
    for (size_t i = 0; i < sentence.size(); ++i) cm.add(sentence[i].tag, predicted[i]);
  }
  return {compute_metrics(cm), cm};
}

TrainTestSplit split_train_test(const AnnotatedDataset& ds, double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw std::invalid_argument("split_train_test: fraction must be in (0, 1)");
  }
  const size_t n = ds.sentences().size();
  const auto n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n < 2 || n_train == 0 || n_train == n) {
    throw std::invalid_argument("split_train_test: " + std::to_string(n) +
                                " sentences cannot be split into two non-empty parts");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  TrainTestSplit out;
  for (size_t k = 0; k < n; ++k) {
    (k < n_train ? out.train : out.test).add_sentence(ds.sentences()[order[k]]);
  }
  return out;
}

std::string format_report_tsv(std::span<const ModelResult> results) {
  if (results.empty()) throw std::invalid_argument("report: no results");
  std::ostringstream out;
  out << "# macro\nmodel\tprecision\trecall\tf1\n";
  for (const auto& r : results) {
    out << r.model << '\t' << fixed2(r.metrics.macro_precision) << '\t'
        << fixed2(r.metrics.macro_recall) << '\t' << fixed2(r.metrics.macro_f1) << '\n';
  }
  out << "\n# class_f1\nmodel";
  for (LanguageTag t : kAllTags) out << '\t' << to_string(t);
  out << '\n';
  for (const auto& r : results) {
    out << r.model;
    for (const auto& m : r.metrics.per_class) out << '\t' << fixed2(m.f1);
    out << '\n';
  }
  out << "\n# per_class\nmodel\tclass\tprecision\trecall\tf1\tsupport\tzero_support\n";
  for (const auto& r : results) {
    for (size_t c = 0; c < kNumTags; ++c) {
      const auto& m = r.metrics.per_class[c];
      out << r.model << '\t' << to_string(kAllTags[c]) << '\t' << fixed2(m.precision) << '\t'
          << fixed2(m.recall) << '\t' << fixed2(m.f1) << '\t' << m.support << '\t'
          << (m.support == 0 ? "yes" : "no") << '\n';
    }
    out << r.model << "\tmacro\t" << fixed2(r.metrics.macro_precision) << '\t'
        << fixed2(r.metrics.macro_recall) << '\t' << fixed2(r.metrics.macro_f1) << "\t\t\n";
  }
  return out.str();
}

std::string format_report_text(std::span<const ModelResult> results) {
  if (results.empty()) throw std::invalid_argument("report: no results");
  size_t width = 5;
  for (const auto& r : results) width = std::max(width, r.model.size());
  auto pad = [](std::string s, size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };

  std::ostringstream out;
  out << "Macro-averaged metrics\n"
      << pad("Model", width) << "  Precision  Recall  F1-score\n";
  for (const auto& r : results) {
    out << pad(r.model, width) << "  " << pad(fixed2(r.metrics.macro_precision), 9) << "  "
        << pad(fixed2(r.metrics.macro_recall), 6) << "  " << fixed2(r.metrics.macro_f1) << '\n';
  }

  out << "\nCategory-wise F1-score\n" << pad("Model", width);
  for (size_t c = 0; c < kNumTags; ++c) {
    const std::string name(to_string(kAllTags[c]));
    out << "  " << (c + 1 < kNumTags ? pad(name, 8) : name);
  }
  out << '\n';
  for (const auto& r : results) {
    out << pad(r.model, width);
    for (size_t c = 0; c < kNumTags; ++c) {
      const std::string v = fixed2(r.metrics.per_class[c].f1);
      out << "  " << (c + 1 < kNumTags ? pad(v, 8) : v);
    }
    out << '\n';
  }

  for (const auto& r : results) {
    out << '\n' << r.model << '\n'
        << pad("Class", 8) << "  Precision  Recall  F1-score  Support\n";
    for (size_t c = 0; c < kNumTags; ++c) {
      const auto& m = r.metrics.per_class[c];
      out << pad(std::string(to_string(kAllTags[c])), 8) << "  " << pad(fixed2(m.precision), 9)
          << "  " << pad(fixed2(m.recall), 6) << "  " << pad(fixed2(m.f1), 8) << "  " << m.support
          << (m.support == 0 ? "  (no test support)" : "") << '\n';
    }
    out << pad("macro", 8) << "  " << pad(fixed2(r.metrics.macro_precision), 9) << "  "
        << pad(fixed2(r.metrics.macro_recall), 6) << "  " << fixed2(r.metrics.macro_f1) << '\n';
  }
  return out.str();
}

std::vector<ModelResult> parse_report_tsv(std::string_view text) {
  std::vector<ModelResult> results;
  std::map<std::string, size_t> index;
  auto result_for = [&](const std::string& model, bool create, size_t line_no) -> ModelResult& {
    auto it = index.find(model);
    if (it != index.end()) return results[it->second];
    if (!create) {
      throw FormatError("report line " + std::to_string(line_no) + ": unknown model '" + model + "'");
    }
    index.emplace(model, results.size());
    results.push_back({model, {}});
    return results.back();
  };

  std::string section;
  bool expect_header = false;
  size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      section = line.substr(2);
      if (section != "macro" && section != "class_f1" && section != "per_class") {
        throw FormatError("report line " + std::to_string(line_no) + ": unknown section");
      }
      expect_header = true;
      continue;
    }
    if (expect_header) {
      expect_header = false;
      continue;
    }
    const auto f = split_tabs(line);
    auto fail = [&] {
      throw FormatError("report line " + std::to_string(line_no) + ": wrong field count");
    };
    if (section == "macro") {
      if (f.size() != 4) fail();
      ModelResult& r = result_for(f[0], true, line_no);
      r.metrics.macro_precision = parse_number(f[1], line_no);
      r.metrics.macro_recall = parse_number(f[2], line_no);
      r.metrics.macro_f1 = parse_number(f[3], line_no);
    } else if (section == "class_f1") {
      if (f.size() != kNumTags + 1) fail();
      ModelResult& r = result_for(f[0], false, line_no);
      for (size_t c = 0; c < kNumTags; ++c) r.metrics.per_class[c].f1 = parse_number(f[c + 1], line_no);
    } else if (section == "per_class") {
      if (f.size() != 7) fail();
      ModelResult& r = result_for(f[0], false, line_no);
      if (f[1] == "macro") continue;
      const auto tag = parse_tag(f[1]);
      if (!tag) throw FormatError("report line " + std::to_string(line_no) + ": unknown class");
      ClassMetrics& m = r.metrics.per_class[tag_index(*tag)];
      m.precision = parse_number(f[2], line_no);
      m.recall = parse_number(f[3], line_no);
      m.f1 = parse_number(f[4], line_no);
      m.support = static_cast<uint64_t>(parse_number(f[5], line_no));
    } else {
      throw FormatError("report line " + std::to_string(line_no) + ": data outside a section");
    }
  }
  if (results.empty()) throw FormatError("report: no results");
  return results;
}

}  // namespace coli
