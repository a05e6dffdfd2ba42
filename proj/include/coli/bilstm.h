#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "coli/corpus.h"
#include "coli/embeddings.h"
#include "coli/ensemble.h"

namespace coli {

// Six tags plus the padding class.
inline constexpr size_t kBilstmClasses = kNumTags + 1;
inline constexpr uint8_t kPadClass = kNumTags;

struct BilstmConfig {
  size_t max_seq_len = 100;
  // 0 feeds the merged vectors straight into the LSTMs; otherwise a learned
  // linear map projects them to this width first.
  size_t projection_dim = 0;
  size_t hidden = 300;  // per direction
  size_t epochs = 200;
  // The first half of the epochs uses phase1_batch, the rest phase2_batch.
  size_t phase1_batch = 128;
  size_t phase2_batch = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;
  bool trainable_embeddings = true;
  uint64_t seed = 1;
};

// Gate blocks are stacked [input; forget; candidate; output].
struct LstmParams {
  Eigen::MatrixXd input;      // 4H x E
  Eigen::MatrixXd recurrent;  // 4H x H
  Eigen::VectorXd bias;       // 4H
};

struct BilstmParams {
  Eigen::MatrixXd embedding;   // merged-dim x vocab, one column per word
  Eigen::MatrixXd projection;  // E x merged-dim, or empty
  LstmParams forward;
  LstmParams backward;
  Eigen::MatrixXd output;      // 7 x 2H
  Eigen::VectorXd output_bias;  // 7

  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  // Same shapes, all zeros.
  BilstmParams zeros_like() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f(self.embedding);
    f(self.projection);
    f(self.forward.input);
    f(self.forward.recurrent);
    f(self.forward.bias);
    f(self.backward.input);
    f(self.backward.recurrent);
    f(self.backward.bias);
    f(self.output);
    f(self.output_bias);
  }
};

// Parameters of both LSTM directions: 2 * 4 * (H * (E + H) + H).
constexpr uint64_t bilstm_parameter_count(uint64_t input_dim, uint64_t hidden) {
  return 2 * 4 * (hidden * (input_dim + hidden) + hidden);
}

// Dense softmax layer applied at every timestep: (2H + 1) * classes.
constexpr uint64_t time_distributed_parameter_count(uint64_t hidden, uint64_t classes) {
  return (2 * hidden + 1) * classes;
}

constexpr uint64_t embedding_parameter_count(uint64_t vocab, uint64_t dim) { return vocab * dim; }

class BilstmModel {
 public:
  BilstmModel() = default;
  // Vocabulary rows are initialised from the merged vectors of `words`.
  BilstmModel(const BilstmConfig& config, const EmbeddingSet& embeddings,
              std::vector<std::string> words);
  BilstmModel(const BilstmConfig& config, std::vector<std::string> words, BilstmParams params);

  const BilstmConfig& config() const { return config_; }
  const std::vector<std::string>& vocabulary() const { return words_; }
  const BilstmParams& params() const { return params_; }
  BilstmParams& params() { return params_; }

  size_t merged_dim() const { return static_cast<size_t>(params_.embedding.rows()); }
  size_t lstm_input_dim() const;
  size_t hidden() const { return static_cast<size_t>(params_.forward.recurrent.cols()); }

  // -1 when the word is not in the vocabulary.
  int64_t word_id(const std::string& word) const;

  uint64_t lstm_parameter_count() const;

  bool operator==(const BilstmModel& o) const;

 private:
  BilstmConfig config_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, uint32_t> ids_;
  BilstmParams params_;
};

// Token ids index the embedding columns; ids >= vocab size select
// extra[id - vocab] (out-of-vocabulary inputs, never updated).
struct PaddedBatch {
  size_t batch = 0;
  size_t steps = 0;
  std::vector<int64_t> tokens;  // batch x steps, row-major
  std::vector<uint8_t> tags;    // kPadClass where mask is 0
  std::vector<uint8_t> mask;
  std::vector<Eigen::VectorXd> extra;

  size_t at(size_t b, size_t t) const { return b * steps + t; }
  size_t length(size_t b) const;  // number of leading unmasked steps
};

// Mask must be a prefix of ones per row.
PaddedBatch make_batch(const std::vector<std::vector<int64_t>>& tokens,
                       const std::vector<std::vector<uint8_t>>& tags, size_t steps);

using StepDistribution = std::array<double, kBilstmClasses>;

// batch x steps distributions, row-major. Padded steps still get an output,
// computed from zero hidden states.
std::vector<StepDistribution> bilstm_forward(const BilstmModel& model, const PaddedBatch& batch);

struct HiddenStates {
  Eigen::MatrixXd forward;   // H x len
  Eigen::MatrixXd backward;  // H x len
};

// Hidden states for one sequence of LSTM inputs (E x len).
HiddenStates bilstm_hidden(const BilstmModel& model, const Eigen::MatrixXd& inputs);

// Masked mean cross-entropy over unmasked steps; gradient has the shape
// of model.params().
double bilstm_loss(const BilstmModel& model, const PaddedBatch& batch,
                   BilstmParams* grad = nullptr);

struct BilstmTrainReport {
  double initial_loss = 0;
  std::vector<double> epoch_loss;
  size_t truncated_sentences = 0;
};

BilstmModel train_bilstm(const AnnotatedDataset& train, const EmbeddingSet& embeddings,
                         const BilstmConfig& config, BilstmTrainReport* report = nullptr);

// CoLI-BiLSTM wrapped as a tagger. Out-of-vocabulary words use their merged
// vector from the embedding set.
class BilstmTagger : public Tagger {
 public:
  BilstmTagger() = default;
  BilstmTagger(BilstmModel model, EmbeddingSet embeddings)
      : model_(std::move(model)), embeddings_(std::move(embeddings)) {}

  std::string name() const override { return "CoLI-BiLSTM"; }
  // Renormalised over the six tags (padding class removed).
  std::vector<Distribution> predict(const std::vector<std::string>& sentence) const override;

  PaddedBatch encode(const std::vector<std::vector<std::string>>& sentences) const;

  const BilstmModel& model() const { return model_; }
  const EmbeddingSet& embeddings() const { return embeddings_; }

  bool operator==(const BilstmTagger& o) const {
    return model_ == o.model_ && embeddings_ == o.embeddings_;
  }

 private:
  BilstmModel model_;
  EmbeddingSet embeddings_;
};

std::vector<std::pair<std::string, LanguageTag>> tag_sentence(const BilstmTagger& tagger,
                                                              const Sentence& sentence);

std::string serialize_bilstm(const BilstmTagger& tagger);
BilstmTagger deserialize_bilstm(std::string_view bytes);
void save_bilstm(const BilstmTagger& tagger, const std::filesystem::path& path);
BilstmTagger load_bilstm(const std::filesystem::path& path);

}  // namespace coli
