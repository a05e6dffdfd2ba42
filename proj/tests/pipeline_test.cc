#include <gtest/gtest.h>

#include <fstream>

#include "coli/error.h"
#include "coli/pipeline.h"
#include "coli/synth.h"

namespace coli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("coli_pipeline_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(ConfigTest, DefaultsFillMissingKeys) {
  const PipelineConfig c = parse_config(json::parse(R"({"seed": 9, "bpe": {"vocab_size": 77}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.bpe_vocab_size, 77u);
  EXPECT_EQ(c.layout.total_dim(), 1300u);
  EXPECT_EQ(c.mlp.hidden, (std::vector<size_t>{150, 100, 50}));
  EXPECT_EQ(c.bilstm.hidden, 300u);
  EXPECT_DOUBLE_EQ(c.train_fraction, 0.7);
  EXPECT_EQ(c.bilstm_config().seed, 9u);
  EXPECT_EQ(c.ensemble_options().seed, 9u);
  EXPECT_EQ(c.embedding_options().skipgram.seed, 9u);
}

TEST(ConfigTest, EffectiveConfigRoundTrips) {
  const json input = json::parse(R"({
    "seed": 3,
    "paths": {"raw_corpus": "raw.txt", "dataset": "d.conll"},
    "mlp": {"hidden": [8, 4], "alpha": 0.5},
    "bilstm": {"trainable_embeddings": false},
    "models": ["ngrams"]
  })");
  const json dumped = config_to_json(parse_config(input));
  EXPECT_EQ(dumped["mlp"]["hidden"], json::parse("[8, 4]"));
  EXPECT_EQ(dumped["paths"]["raw_corpus"], "raw.txt");
  EXPECT_EQ(dumped["bilstm"]["trainable_embeddings"], false);
  EXPECT_EQ(dumped["linear"]["epochs"], 100);
  EXPECT_EQ(config_to_json(parse_config(dumped)), dumped);
  // Everything given in the input survives unchanged.
  json patched = dumped;
  patched.merge_patch(input);
  EXPECT_EQ(patched, dumped);
}

TEST(ConfigTest, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(parse_config(json::parse(R"({"sed": 1})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"mlp": {"hiden": [1]}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"seed": -1})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"seed": 1.5})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"bpe": 3})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"models": "ngrams"})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse("[]")), ConfigError);
}

TEST(ConfigTest, ValidationChecksPathsAndRanges) {
  const fs::path dir = scratch("validate");
  std::ofstream(dir / "raw.txt") << "a b c\n";
  std::ofstream(dir / "d.conll") << "a\tkn\n";
  PipelineConfig c = parse_config(
      json::parse(R"({"paths": {"raw_corpus": "raw.txt", "dataset": "d.conll"}})"), dir);
  EXPECT_NO_THROW(validate_config(c));

  PipelineConfig bad = c;
  bad.dataset = "missing.conll";
  EXPECT_THROW(validate_config(bad), ConfigError);
  bad = c;
  bad.train_fraction = 1.0;
  EXPECT_THROW(validate_config(bad), ConfigError);
  bad = c;
  bad.models = {"ngrams", "svm"};
  EXPECT_THROW(validate_config(bad), ConfigError);
  bad = c;
  bad.features.affix_lengths = {0};
  EXPECT_THROW(validate_config(bad), ConfigError);
  fs::remove_all(dir);
}

TEST(ConfigTest, LoadResolvesRelativeToConfigFile) {
  const fs::path dir = scratch("load");
  std::ofstream(dir / "c.json") << R"({"paths": {"raw_corpus": "raw.txt"}})";
  const PipelineConfig c = load_config(dir / "c.json");
  EXPECT_EQ(c.resolve(c.raw_corpus), dir / "raw.txt");
  EXPECT_EQ(c.resolve("/abs/x"), fs::path("/abs/x"));
  std::ofstream(dir / "broken.json") << "{";
  EXPECT_THROW(load_config(dir / "broken.json"), ConfigError);
  fs::remove_all(dir);
}

TEST(SummaryTest, TextAndJson) {
  StageSummary s{"train-bpe"};
  s.fields["merges"] = 12;
  s.fields["name"] = "x";
  EXPECT_EQ(format_summary(s, false), "train-bpe: merges=12 name=x");
  EXPECT_EQ(format_summary(s, true), R"({"stage":"train-bpe","merges":12,"name":"x"})");
}

TEST(PipelineTest, SmallRunWritesEveryArtifact) {
  const fs::path dir = scratch("run");
  SynthOptions so;
  so.sentences = 120;
  so.seed = 2;
  const auto corpus = generate_synthetic(so);
  write_lines(corpus.raw_lines, dir / "raw.txt");
  write_dataset(corpus.dataset, dir / "d.conll");
  const json j = json::parse(R"({
    "paths": {"raw_corpus": "raw.txt", "dataset": "d.conll", "output_dir": "out"},
    "bpe": {"vocab_size": 150},
    "embeddings": {"word_dim": 8, "subword_dim": 4, "char_dim": 3, "epochs": 1},
    "linear": {"epochs": 5},
    "mlp": {"hidden": [8], "max_epochs": 3},
    "bilstm": {"hidden": 4, "epochs": 1, "phase1_batch": 32, "phase2_batch": 32}
  })");
  std::vector<std::string> stages;
  run_pipeline(parse_config(j, dir), [&](const StageSummary& s) { stages.push_back(s.stage); });
  EXPECT_EQ(stages, (std::vector<std::string>{"preprocess", "train-bpe", "train-embeddings", "split",
                                              "train-ngrams", "train-vectors", "train-bilstm",
                                              "evaluate"}));
  for (const char* f : {"bpe.model", "embeddings.bin", "ngrams.model", "vectors.model",
                        "bilstm.model", "report.tsv", "report.txt", "effective_config.json",
                        "train.conll", "test.conll"}) {
    EXPECT_TRUE(fs::is_regular_file(dir / "out" / f)) << f;
  }
  for (const auto& entry : fs::directory_iterator(dir / "out")) {
    EXPECT_NE(entry.path().extension(), ".tmp") << entry.path();
  }
  const auto tagger = load_tagger(dir / "out" / "bilstm.model");
  EXPECT_EQ(tagger->name(), "CoLI-BiLSTM");
  EXPECT_EQ(load_tagger(dir / "out" / "ngrams.model")->name(), "CoLI-ngrams");
  EXPECT_THROW(load_tagger(dir / "out" / "report.tsv"), FormatError);
  fs::remove_all(dir);
}

TEST(PipelineTest, FailuresNameTheStage) {
  const fs::path dir = scratch("fail");
  std::ofstream(dir / "raw.txt") << "only one line here\n";
  std::ofstream(dir / "d.conll") << "a\tkn\n";
  const json j = json::parse(
      R"({"paths": {"raw_corpus": "raw.txt", "dataset": "d.conll", "output_dir": "out"}})");
  try {
    run_pipeline(parse_config(j, dir), [](const StageSummary&) {});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "preprocess");
    EXPECT_NE(std::string(e.what()).find("preprocess"), std::string::npos);
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace coli
