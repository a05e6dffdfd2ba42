#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coli/bilstm.h"
#include "coli/embeddings.h"
#include "coli/ensemble.h"
#include "coli/features.h"
#include "coli/linear_model.h"
#include "coli/mlp.h"
#include "coli/skipgram.h"

namespace coli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A failure inside one pipeline stage; what() includes the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("stage " + stage + " failed: " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Everything `coli pipeline` needs. Paths are kept as written; relative
// ones resolve against base_dir (the config file's directory).
struct PipelineConfig {
  uint64_t seed = 1;

  std::filesystem::path raw_corpus;
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "coli-out";
  std::filesystem::path base_dir;

  size_t min_tokens = 3;
  double native_threshold = 0.8;
  std::filesystem::path english_wordlist;  // empty disables the filter
  double raw_fraction = 0.9;

  size_t bpe_vocab_size = 10000;

  MergeLayout layout;
  bool layout_from_corpus = false;
  SkipgramOptions skipgram;

  FeatureTemplate features;
  double train_fraction = 0.7;
  LinearOptions linear;
  MlpOptions mlp;
  BilstmConfig bilstm;

  std::vector<std::string> models = {"ngrams", "vectors", "bilstm"};

  std::filesystem::path resolve(const std::filesystem::path& p) const;

  PreprocessOptions preprocess_options() const;
  EmbeddingOptions embedding_options() const;
  EnsembleOptions ensemble_options() const;
  BilstmConfig bilstm_config() const;
};

// Missing keys take defaults; unknown keys and wrong types throw ConfigError.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
// Effective configuration, defaults included.
nlohmann::json config_to_json(const PipelineConfig& config);

// Checks ranges and that every input path exists. Throws ConfigError.
void validate_config(const PipelineConfig& config);

struct StageSummary {
  std::string stage;
  nlohmann::ordered_json fields = nlohmann::ordered_json::object();
};

using SummarySink = std::function<void(const StageSummary&)>;

// "stage: key=value ..." or a single-line JSON object.
std::string format_summary(const StageSummary& summary, bool json);

// Runs every stage from one config, writing artifacts under output_dir.
// Stage failures are rethrown as StageError.
void run_pipeline(const PipelineConfig& config, const SummarySink& sink);

// Loads a CMLM or CMBL model file.
std::unique_ptr<Tagger> load_tagger(const std::filesystem::path& path);

}  // namespace coli
