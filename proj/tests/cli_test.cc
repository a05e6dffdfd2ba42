#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coli_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const std::string cmd = std::string(COLI_BINARY) + " " + args + " >" + (dir_ / "out").string() +
                            " 2>" + (dir_ / "err").string();
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(dir_ / "out"), slurp(dir_ / "err")};
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, VersionAndHelp) {
  const auto v = run("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("coli"), std::string::npos);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, UnknownSubcommandIsUsageError) {
  const auto r = run("frobnicate");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(CliTest, NgramsWithoutBpeNamesTheFlag) {
  const auto r = run("train --model ngrams --train x.conll --output m.bin");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--bpe"), std::string::npos);
  const auto v = run("train --model bilstm --train x.conll --output m.bin");
  EXPECT_EQ(v.code, 2);
  EXPECT_NE(v.err.find("--embeddings"), std::string::npos);
}

TEST_F(CliTest, StageFailureNamesStage) {
  const auto r = run("train-bpe --input " + path("missing.txt") + " --output " + path("b.model"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("train-bpe"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("b.model")));
}

TEST_F(CliTest, StagesChainThroughFiles) {
  ASSERT_EQ(run("synth --sentences 150 --seed 4 --output " + path("raw.txt") + "," + path("d.conll"))
                .code,
            0);
  auto r = run("preprocess --input " + path("raw.txt") + " --output " + path("s.txt"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("preprocess: comments=150"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("s.txt.pool")));
  ASSERT_EQ(run("train-bpe --input " + path("s.txt") + " --vocab-size 120 --output " + path("b.model"))
                .code,
            0);
  r = run("--json-summary train-embeddings --input " + path("s.txt") + " --bpe " + path("b.model") +
          " --output " + path("e.bin") + " --word-dim 8 --subword-dim 4 --char-dim 3 --epochs 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("{\"stage\":\"train-embeddings\"", 0), 0u) << r.out;

  std::ofstream(path("cfg.json")) << R"({"linear": {"epochs": 5}, "mlp": {"hidden": [8], "max_epochs": 3}})";
  r = run("train --model ngrams --train " + path("d.conll") + " --bpe " + path("b.model") +
          " --config " + path("cfg.json") + " --output " + path("n.model"));
  ASSERT_EQ(r.code, 0) << r.err;
  r = run("train --model bilstm --train " + path("d.conll") + " --embeddings " + path("e.bin") +
          " --epochs 1 --hidden 4 --output " + path("l.model"));
  ASSERT_EQ(r.code, 0) << r.err;

  std::ofstream(path("tokens.txt")) << "super chennagide Mysurupura\n\nnodi bro\n";
  r = run("predict --model " + path("n.model") + " --input " + path("tokens.txt") + " --output " +
          path("tagged.conll"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tokens=5"), std::string::npos);
  const std::string tagged = slurp(path("tagged.conll"));
  EXPECT_EQ(tagged.rfind("super\t", 0), 0u);

  for (const char* model : {"n.model", "l.model"}) {
    r = run("evaluate --model " + path(model) + " --test " + path("d.conll") + " --output " +
            path("report.tsv"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("macro_f1="), std::string::npos);
    EXPECT_EQ(slurp(path("report.tsv")).rfind("# macro\n", 0), 0u);
  }
}

TEST_F(CliTest, PipelineConfigErrors) {
  std::ofstream(path("c.json")) << R"({"paths": {"raw_corpus": "nope.txt", "dataset": "nope.conll"}})";
  auto r = run("pipeline --config " + path("c.json"));
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("raw_corpus"), std::string::npos);

  r = run("pipeline --print-config --config " + path("c.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"vocab_size\": 10000"), std::string::npos);

  std::ofstream(path("bad.json")) << R"({"unknown": 1})";
  r = run("pipeline --config " + path("bad.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown"), std::string::npos);
}

}  // namespace
