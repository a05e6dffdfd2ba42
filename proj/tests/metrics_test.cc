#include <gtest/gtest.h>

#include "coli/error.h"
#include "coli/metrics.h"
#include "coli/random.h"

namespace coli {
namespace {

// Replays fixed predictions, one sentence at a time.
class ScriptedTagger : public Tagger {
 public:
  explicit ScriptedTagger(std::vector<LanguageTag> script) : script_(std::move(script)) {}
  std::string name() const override { return "scripted"; }
  std::vector<Distribution> predict(const std::vector<std::string>& sentence) const override {
    std::vector<Distribution> out;
    for (size_t i = 0; i < sentence.size(); ++i) {
      Distribution d{};
      d[tag_index(script_.at(pos_++))] = 1.0;
      out.push_back(d);
    }
    return out;
  }

 private:
  std::vector<LanguageTag> script_;
  mutable size_t pos_ = 0;
};

AnnotatedDataset one_sentence(const std::vector<LanguageTag>& gold) {
  AnnotatedSentence s;
  for (size_t i = 0; i < gold.size(); ++i) s.push_back({"w" + std::to_string(i), gold[i]});
  return AnnotatedDataset({s});
}

constexpr LanguageTag kn = LanguageTag::kn;
constexpr LanguageTag en = LanguageTag::en;

TEST(MetricsTest, HandComputedFourTokens) {
  const ScriptedTagger tagger({kn, en, en, en});
  const auto r = evaluate(tagger, one_sentence({kn, kn, en, en}));
  const auto& k = r.metrics.per_class[tag_index(kn)];
  const auto& e = r.metrics.per_class[tag_index(en)];
  EXPECT_NEAR(k.precision, 1.0, 1e-9);
  EXPECT_NEAR(k.recall, 0.5, 1e-9);
  EXPECT_NEAR(k.f1, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(e.precision, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(e.recall, 1.0, 1e-9);
  EXPECT_NEAR(e.f1, 0.8, 1e-9);
  EXPECT_NEAR((k.f1 + e.f1) / 2, 0.7333333333, 1e-9);
  EXPECT_NEAR(r.metrics.macro_f1, (2.0 / 3.0 + 0.8) / 6.0, 1e-9);
  EXPECT_EQ(r.metrics.zero_support().size(), 4u);
  EXPECT_EQ(r.confusion.total(), 4u);
  EXPECT_EQ(r.confusion.counts[tag_index(kn)][tag_index(en)], 1u);
}

TEST(MetricsTest, PerfectAndConstantBaselines) {
  const std::vector<LanguageTag> all(kAllTags.begin(), kAllTags.end());
  const auto perfect = evaluate(ScriptedTagger(all), one_sentence(all));
  EXPECT_DOUBLE_EQ(perfect.metrics.macro_f1, 1.0);
  EXPECT_DOUBLE_EQ(perfect.metrics.macro_precision, 1.0);

  const auto baseline = evaluate(ScriptedTagger({kn, kn, kn, kn}), one_sentence({kn, en, kn, en}));
  EXPECT_DOUBLE_EQ(baseline.metrics.per_class[tag_index(kn)].recall, 1.0);
  EXPECT_DOUBLE_EQ(baseline.metrics.per_class[tag_index(en)].recall, 0.0);
  EXPECT_DOUBLE_EQ(baseline.metrics.per_class[tag_index(en)].f1, 0.0);
}

TEST(MetricsTest, ConfusionMatchesBruteForce) {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + rng.below(60);
    std::vector<LanguageTag> gold, pred;
    for (size_t i = 0; i < n; ++i) {
      gold.push_back(kAllTags[rng.below(kNumTags)]);
      pred.push_back(kAllTags[rng.below(kNumTags)]);
    }
    const ConfusionMatrix cm = confusion_matrix(gold, pred);
    const MetricsReport r = compute_metrics(cm);
    double macro = 0;
    for (size_t c = 0; c < kNumTags; ++c) {
      size_t tp = 0, fp = 0, fn = 0;
      for (size_t i = 0; i < n; ++i) {
        const bool g = tag_index(gold[i]) == c;
        const bool p = tag_index(pred[i]) == c;
        tp += g && p;
        fp += !g && p;
        fn += g && !p;
      }
      const double P = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
      const double R = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
      const double F = P + R > 0 ? 2 * P * R / (P + R) : 0.0;
      ASSERT_NEAR(r.per_class[c].precision, P, 1e-12);
      ASSERT_NEAR(r.per_class[c].recall, R, 1e-12);
      ASSERT_NEAR(r.per_class[c].f1, F, 1e-12);
      ASSERT_EQ(cm.gold_count(c), tp + fn);
      ASSERT_EQ(cm.predicted_count(c), tp + fp);
      macro += F / kNumTags;
    }
    ASSERT_NEAR(r.macro_f1, macro, 1e-12);
    ASSERT_GE(r.macro_f1, 0.0);
    ASSERT_LE(r.macro_f1, 1.0);

    // Token order does not matter.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<LanguageTag> g2, p2;
    for (size_t i : order) {
      g2.push_back(gold[i]);
      p2.push_back(pred[i]);
    }
    ASSERT_EQ(confusion_matrix(g2, p2), cm);
  }
}

TEST(MetricsTest, EmptyTestSetIsAnError) {
  EXPECT_THROW(evaluate(ScriptedTagger({}), AnnotatedDataset{}), std::invalid_argument);
  EXPECT_THROW(confusion_matrix(std::vector<LanguageTag>{kn}, std::vector<LanguageTag>{}),
               std::invalid_argument);
}

TEST(SplitTrainTestTest, SeventyThirty) {
  AnnotatedDataset ds;
  for (int i = 0; i < 10; ++i) ds.add_sentence({{"w" + std::to_string(i), kn}});
  const auto a = split_train_test(ds, 0.7, 4);
  EXPECT_EQ(a.train.sentences().size(), 7u);
  EXPECT_EQ(a.test.sentences().size(), 3u);
  EXPECT_EQ(split_train_test(ds, 0.7, 4).train, a.train);

  std::vector<std::string> words;
  for (const auto* part : {&a.train, &a.test}) {
    for (const auto& s : part->sentences()) words.push_back(s[0].word);
  }
  std::sort(words.begin(), words.end());
  EXPECT_EQ(std::unique(words.begin(), words.end()), words.end());
  EXPECT_EQ(words.size(), 10u);

  AnnotatedDataset one;
  one.add_sentence({{"w", kn}});
  EXPECT_THROW(split_train_test(one, 0.7, 1), std::invalid_argument);
  EXPECT_THROW(split_train_test(ds, 0.99, 1), std::invalid_argument);
}

TEST(ReportTest, SingleModelShapeAndRoundTrip) {
  const auto r = evaluate(ScriptedTagger({kn, en, en, en}), one_sentence({kn, kn, en, en}));
  const std::vector<ModelResult> results = {{"CoLI-ngrams", r.metrics}};
  const std::string tsv = format_report_tsv(results);

  size_t per_class_rows = 0;
  bool in_section = false;
  std::istringstream in(tsv);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# ", 0) == 0) {
      in_section = line == "# per_class";
      continue;
    }
    if (in_section && line.rfind("CoLI-ngrams\t", 0) == 0) ++per_class_rows;
  }
  EXPECT_EQ(per_class_rows, kNumTags + 1);
  EXPECT_NE(tsv.find("CoLI-ngrams\tkn\t1.00\t0.50\t0.67\t2\tno"), std::string::npos);
  EXPECT_NE(tsv.find("CoLI-ngrams\tname\t0.00\t0.00\t0.00\t0\tyes"), std::string::npos);

  const auto parsed = parse_report_tsv(tsv);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0].model, "CoLI-ngrams");
  EXPECT_NEAR(parsed[0].metrics.per_class[0].f1, 0.67, 1e-12);
  EXPECT_EQ(format_report_tsv(parsed), tsv);

  const std::string text = format_report_text(results);
  EXPECT_NE(text.find("(no test support)"), std::string::npos);
  EXPECT_THROW(format_report_tsv({}), std::invalid_argument);
  EXPECT_THROW(parse_report_tsv("# macro\nmodel\tprecision\trecall\tf1\nx\t1\n"), FormatError);
}

TEST(ReportTest, MultiModelRoundTrip) {
  Rng rng(8);
  std::vector<ModelResult> results;
  for (const char* name : {"CoLI-ngrams", "MLP (ngrams)", "CoLI-BiLSTM"}) {
    std::vector<LanguageTag> gold, pred;
    for (int i = 0; i < 50; ++i) {
      gold.push_back(kAllTags[rng.below(kNumTags)]);
      pred.push_back(kAllTags[rng.below(kNumTags)]);
    }
    results.push_back({name, compute_metrics(confusion_matrix(gold, pred))});
  }
  const std::string tsv = format_report_tsv(results);
  EXPECT_EQ(format_report_tsv(parse_report_tsv(tsv)), tsv);
}

}  // namespace
}  // namespace coli
