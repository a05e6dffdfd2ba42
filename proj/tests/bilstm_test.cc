#include <gtest/gtest.h>

#include "coli/bilstm.h"
#include "coli/error.h"
#include "coli/metrics.h"
#include "coli/synth.h"
#include "gradcheck.h"

namespace coli {
namespace {

struct Fixture {
  AnnotatedDataset train;
  AnnotatedDataset test;
  EmbeddingSet embeddings;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SynthOptions so;
    so.sentences = 160;
    so.seed = 3;
    const auto corpus = generate_synthetic(so);
    auto split = split_train_test(corpus.dataset, 0.7, 2);
    std::vector<Sentence> raw;
    for (const auto& s : split.train.sentences()) {
      Sentence r;
      for (const auto& t : s) r.tokens.push_back(t.word);
      raw.push_back(r);
    }
    const BpeModel bpe = train_bpe(raw, 120);
    EmbeddingOptions eo;
    eo.skipgram.epochs = 2;
    return Fixture{split.train, split.test,
                   build_embedding_set(raw, bpe, MergeLayout{8, 4, 3, 3, 5}, eo)};
  }();
  return f;
}

BilstmConfig small_config() {
  BilstmConfig c;
  c.hidden = 8;
  c.epochs = 4;
  c.phase1_batch = 16;
  c.phase2_batch = 8;
  c.learning_rate = 1e-2;
  return c;
}

double dataset_loss(const BilstmModel& model, const AnnotatedDataset& ds) {
  std::vector<std::vector<int64_t>> tokens;
  std::vector<std::vector<uint8_t>> tags;
  size_t steps = 0;
  for (const auto& s : ds.sentences()) {
    std::vector<int64_t> ids;
    std::vector<uint8_t> t;
    for (const auto& tok : s) {
      ids.push_back(model.word_id(tok.word));
      t.push_back(static_cast<uint8_t>(tag_index(tok.tag)));
    }
    steps = std::max(steps, ids.size());
    tokens.push_back(ids);
    tags.push_back(t);
  }
  return bilstm_loss(model, make_batch(tokens, tags, steps));
}

TEST(BilstmParameterCount, ShapeArithmetic) {
  EXPECT_EQ(bilstm_parameter_count(1000, 300), 3122400u);
  EXPECT_EQ(time_distributed_parameter_count(300, kBilstmClasses), 4207u);
  EXPECT_EQ(embedding_parameter_count(19162, 1000), 19162000u);
}

TEST(BilstmTest, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    EXPECT_LE(testing::bilstm_gradcheck(seed), 1e-4) << "seed " << seed;
  }
}

TEST(BilstmTest, ModelCountsItsOwnParameters) {
  const auto& f = fixture();
  const BilstmModel m(small_config(), f.embeddings, {"a", "b"});
  EXPECT_EQ(m.lstm_parameter_count(), bilstm_parameter_count(m.lstm_input_dim(), 8));
  EXPECT_EQ(m.merged_dim(), f.embeddings.layout.total_dim());
  EXPECT_EQ(m.word_id("b"), 1);
  EXPECT_EQ(m.word_id("zz"), -1);
}

TEST(BilstmTest, PaddingDoesNotChangeRealSteps) {
  const auto& f = fixture();
  const BilstmModel m(small_config(), f.embeddings, {"a", "b", "c"});
  const std::vector<std::vector<int64_t>> tokens = {{0, 1, 2}, {2, 0}};
  const std::vector<std::vector<uint8_t>> tags = {{0, 1, 2}, {3, 4}};
  const PaddedBatch tight = make_batch(tokens, tags, 3);
  const PaddedBatch loose = make_batch(tokens, tags, 9);
  EXPECT_EQ(loose.length(1), 2u);
  EXPECT_EQ(loose.tags[loose.at(1, 5)], kPadClass);
  EXPECT_NEAR(bilstm_loss(m, tight), bilstm_loss(m, loose), 1e-12);
  const auto a = bilstm_forward(m, tight);
  const auto b = bilstm_forward(m, loose);
  for (size_t row = 0; row < 2; ++row) {
    for (size_t t = 0; t < tight.length(row); ++t) {
      for (size_t c = 0; c < kBilstmClasses; ++c) {
        EXPECT_NEAR(a[tight.at(row, t)][c], b[loose.at(row, t)][c], 1e-12);
      }
    }
  }
}

TEST(BilstmTest, OneEpochLowersTrainingLoss) {
  const auto& f = fixture();
  BilstmConfig cfg = small_config();
  cfg.epochs = 1;
  BilstmTrainReport report;
  const BilstmModel m = train_bilstm(f.train, f.embeddings, cfg, &report);
  EXPECT_LT(dataset_loss(m, f.train), report.initial_loss);
  EXPECT_EQ(report.epoch_loss.size(), 1u);
}

TEST(BilstmTest, TrainsTagsAndRoundTrips) {
  const auto& f = fixture();
  BilstmConfig cfg = small_config();
  cfg.epochs = 12;
  const BilstmModel m = train_bilstm(f.train, f.embeddings, cfg);
  const BilstmTagger tagger(m, f.embeddings);
  EXPECT_GE(evaluate(tagger, f.test).metrics.macro_f1, 0.6);

  const auto tagged = tag_sentence(tagger, Sentence{{"notaword", f.train.sentences()[0][0].word}});
  EXPECT_EQ(tagged.size(), 2u);
  EXPECT_THROW(tag_sentence(tagger, Sentence{}), std::invalid_argument);
  for (const auto& d : tagger.predict({"x", "y", "z"})) {
    double sum = 0;
    for (double p : d) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }

  const std::string bytes = serialize_bilstm(tagger);
  const BilstmTagger back = deserialize_bilstm(bytes);
  EXPECT_EQ(back, tagger);
  EXPECT_EQ(serialize_bilstm(back), bytes);
  EXPECT_THROW(deserialize_bilstm(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_EQ(serialize_bilstm(BilstmTagger(train_bilstm(f.train, f.embeddings, cfg), f.embeddings)),
            bytes);
}

TEST(BilstmTest, TruncatesLongTrainingSentences) {
  const auto& f = fixture();
  BilstmConfig cfg = small_config();
  cfg.epochs = 1;
  cfg.max_seq_len = 3;
  BilstmTrainReport report;
  train_bilstm(f.train, f.embeddings, cfg, &report);
  EXPECT_GT(report.truncated_sentences, 0u);
}

TEST(BilstmTest, FrozenEmbeddingsStayFixed) {
  const auto& f = fixture();
  BilstmConfig cfg = small_config();
  cfg.epochs = 1;
  cfg.trainable_embeddings = false;
  const BilstmModel trained = train_bilstm(f.train, f.embeddings, cfg);
  const BilstmModel initial(cfg, f.embeddings, trained.vocabulary());
  EXPECT_EQ(trained.params().embedding, initial.params().embedding);
  EXPECT_NE(trained.params().output, initial.params().output);
}

TEST(BilstmTest, RejectsEmptyTrainingSet) {
  EXPECT_THROW(train_bilstm(AnnotatedDataset{}, fixture().embeddings, small_config()),
               std::invalid_argument);
}

}  // namespace
}  // namespace coli
