#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "coli/classifier.h"
#include "coli/corpus.h"
#include "coli/embeddings.h"
#include "coli/features.h"
#include "coli/linear_model.h"
#include "coli/mlp.h"

namespace coli {

using Estimator = std::variant<LinearModel, MlpModel>;

Distribution predict_proba(const Estimator& e, const SparseRow& x);
std::string estimator_name(const Estimator& e);  // "LinearSVC", "LR" or "MLP"

struct Vote {
  LanguageTag tag;
  Distribution distribution;
};

// Equal-weight mean of the member distributions; argmax ties go to the
// earlier class. Throws on an empty span.
Vote soft_vote(std::span<const Distribution> member_outputs);

class EnsembleModel {
 public:
  EnsembleModel() = default;
  explicit EnsembleModel(std::vector<Estimator> members);

  const std::vector<Estimator>& members() const { return members_; }
  Vote vote(const SparseRow& x) const;

  bool operator==(const EnsembleModel&) const = default;

 private:
  std::vector<Estimator> members_;
};

// Any trained word-level language identifier.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Distribution> predict(const std::vector<std::string>& sentence) const = 0;
};

std::vector<LanguageTag> tag_words(const Tagger& tagger, const std::vector<std::string>& sentence);

// Word -> feature row for one of the two feature regimes.
struct NgramFeaturizer {
  FeatureTemplate tmpl;
  BpeModel bpe;
  FeatureVocabulary vocab;

  bool operator==(const NgramFeaturizer&) const = default;
};

struct VectorFeaturizer {
  EmbeddingSet embeddings;

  bool operator==(const VectorFeaturizer&) const = default;
};

using Featurizer = std::variant<NgramFeaturizer, VectorFeaturizer>;

SparseRow featurize(const Featurizer& f, const std::string& word);
size_t feature_dim(const Featurizer& f);

// CoLI-ngrams / CoLI-vectors: per-word featurizer + soft-voting ensemble.
class WordClassifier : public Tagger {
 public:
  WordClassifier() = default;
  WordClassifier(Featurizer featurizer, EnsembleModel ensemble);

  std::string name() const override;
  std::vector<Distribution> predict(const std::vector<std::string>& sentence) const override;

  const Featurizer& featurizer() const { return featurizer_; }
  const EnsembleModel& ensemble() const { return ensemble_; }
  bool is_ngrams() const { return std::holds_alternative<NgramFeaturizer>(featurizer_); }

  bool operator==(const WordClassifier& o) const {
    return featurizer_ == o.featurizer_ && ensemble_ == o.ensemble_;
  }

 private:
  Featurizer featurizer_;
  EnsembleModel ensemble_;
};

// Predicts with a single ensemble member, for per-estimator reporting.
class MemberTagger : public Tagger {
 public:
  MemberTagger(const WordClassifier& model, size_t member) : model_(model), member_(member) {}

  std::string name() const override;
  std::vector<Distribution> predict(const std::vector<std::string>& sentence) const override;

 private:
  const WordClassifier& model_;
  size_t member_;
};

struct EnsembleOptions {
  LinearOptions linear;
  MlpOptions mlp;
  uint64_t seed = 1;  // overrides the member seeds
};

struct EnsembleTrainReport {
  TrainReport hinge;
  TrainReport logistic;
  TrainReport mlp;
  size_t feature_dim = 0;
  size_t rows = 0;
};

// Hinge linear, logistic regression and MLP, trained on the same rows.
EnsembleModel train_ensemble(const LabeledRows& data, const EnsembleOptions& opts,
                             EnsembleTrainReport* report = nullptr);

WordClassifier train_coli_ngrams(const AnnotatedDataset& train, const BpeModel& bpe,
                                 const FeatureTemplate& tmpl, const EnsembleOptions& opts,
                                 EnsembleTrainReport* report = nullptr);

WordClassifier train_coli_vectors(const AnnotatedDataset& train, const EmbeddingSet& embeddings,
                                  const EnsembleOptions& opts,
                                  EnsembleTrainReport* report = nullptr);

std::string serialize_word_classifier(const WordClassifier& model);
WordClassifier deserialize_word_classifier(std::string_view bytes);
void save_word_classifier(const WordClassifier& model, const std::filesystem::path& path);
WordClassifier load_word_classifier(const std::filesystem::path& path);

}  // namespace coli
