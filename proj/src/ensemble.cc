#include "coli/ensemble.h"

#include <stdexcept>
#include <unordered_map>

#include "coli/binary_io.h"
#include "coli/error.h"

namespace coli {

namespace {

constexpr std::string_view kMagic = "CMLM";
constexpr uint32_t kVersion = 1;

enum class MemberKind : uint8_t { hinge = 0, logistic = 1, mlp = 2 };

void write_matrix(BinaryWriter& w, const Eigen::MatrixXd& m) {
  w.u32(static_cast<uint32_t>(m.rows()));
  w.u32(static_cast<uint32_t>(m.cols()));
  w.f64s({m.data(), static_cast<size_t>(m.size())});
}

Eigen::MatrixXd read_matrix(BinaryReader& r) {
  const uint32_t rows = r.u32();
  const uint32_t cols = r.u32();
  Eigen::MatrixXd m(rows, cols);
  r.f64s({m.data(), static_cast<size_t>(m.size())});
  return m;
}

void write_vector(BinaryWriter& w, const Eigen::VectorXd& v) {
  w.u32(static_cast<uint32_t>(v.size()));
  w.f64s({v.data(), static_cast<size_t>(v.size())});
}

Eigen::VectorXd read_vector(BinaryReader& r) {
  Eigen::VectorXd v(r.u32());
  r.f64s({v.data(), static_cast<size_t>(v.size())});
  return v;
}

void write_sizes(BinaryWriter& w, const std::vector<size_t>& v) {
  w.u32(static_cast<uint32_t>(v.size()));
  for (size_t x : v) w.u32(static_cast<uint32_t>(x));
}

std::vector<size_t> read_sizes(BinaryReader& r) {
  std::vector<size_t> v(r.u32());
  for (auto& x : v) x = r.u32();
  return v;
}

void write_estimator(BinaryWriter& w, const Estimator& e) {
  if (const auto* lin = std::get_if<LinearModel>(&e)) {
    w.u8(static_cast<uint8_t>(lin->kind() == LossKind::hinge ? MemberKind::hinge
                                                             : MemberKind::logistic));
    write_matrix(w, lin->weights());
    write_vector(w, lin->bias());
  } else {
    const auto& mlp = std::get<MlpModel>(e);
    w.u8(static_cast<uint8_t>(MemberKind::mlp));
    w.u32(static_cast<uint32_t>(mlp.num_layers()));
    for (size_t l = 0; l < mlp.num_layers(); ++l) {
      write_matrix(w, mlp.weights()[l]);
      write_vector(w, mlp.biases()[l]);
    }
  }
}

Estimator read_estimator(BinaryReader& r) {
  const auto kind = static_cast<MemberKind>(r.u8());
  switch (kind) {
    case MemberKind::hinge:
    case MemberKind::logistic: {
      Eigen::MatrixXd W = read_matrix(r);
      Eigen::VectorXd b = read_vector(r);
      return LinearModel(kind == MemberKind::hinge ? LossKind::hinge : LossKind::logistic,
                         std::move(W), std::move(b));
    }
    case MemberKind::mlp: {
      const uint32_t layers = r.u32();
      std::vector<Eigen::MatrixXd> W;
      std::vector<Eigen::VectorXd> b;
      for (uint32_t l = 0; l < layers; ++l) {
        W.push_back(read_matrix(r));
        b.push_back(read_vector(r));
      }
      return MlpModel(std::move(W), std::move(b));
    }
  }
  throw FormatError("model: unknown estimator kind " + std::to_string(static_cast<int>(kind)));
}

}  // namespace

Distribution predict_proba(const Estimator& e, const SparseRow& x) {
  return std::visit([&](const auto& m) { return m.predict_proba(x); }, e);
}

std::string estimator_name(const Estimator& e) {
  if (const auto* lin = std::get_if<LinearModel>(&e)) {
    return lin->kind() == LossKind::hinge ? "LinearSVC" : "LR";
  }
  return "MLP";
}

Vote soft_vote(std::span<const Distribution> member_outputs) {
  if (member_outputs.empty()) throw std::invalid_argument("soft_vote: no members");
  Distribution mean{};
  for (const auto& d : member_outputs) {
    for (size_t c = 0; c < kNumTags; ++c) mean[c] += d[c];
  }
  for (double& v : mean) v /= static_cast<double>(member_outputs.size());
  return {argmax(mean), mean};
}

EnsembleModel::EnsembleModel(std::vector<Estimator> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble: no members");
}

Vote EnsembleModel::vote(const SparseRow& x) const {
  std::vector<Distribution> outs;
  outs.reserve(members_.size());
  for (const auto& m : members_) outs.push_back(predict_proba(m, x));
  return soft_vote(outs);
}

std::vector<LanguageTag> tag_words(const Tagger& tagger, const std::vector<std::string>& sentence) {
  std::vector<LanguageTag> tags;
  for (const auto& d : tagger.predict(sentence)) tags.push_back(argmax(d));
  return tags;
}

SparseRow featurize(const Featurizer& f, const std::string& word) {
  if (const auto* ng = std::get_if<NgramFeaturizer>(&f)) {
    return vectorize(extract_features(word, ng->bpe, ng->tmpl), ng->vocab);
  }
  const auto& vf = std::get<VectorFeaturizer>(f);
  return dense_row(std::span<const float>(merge_vector(vf.embeddings, word).values));
}

size_t feature_dim(const Featurizer& f) {
  if (const auto* ng = std::get_if<NgramFeaturizer>(&f)) return ng->vocab.size();
  return std::get<VectorFeaturizer>(f).embeddings.layout.total_dim();
}

WordClassifier::WordClassifier(Featurizer featurizer, EnsembleModel ensemble)
    : featurizer_(std::move(featurizer)), ensemble_(std::move(ensemble)) {}

std::string WordClassifier::name() const { return is_ngrams() ? "CoLI-ngrams" : "CoLI-vectors"; }

std::vector<Distribution> WordClassifier::predict(const std::vector<std::string>& sentence) const {
  std::vector<Distribution> out;
  out.reserve(sentence.size());
  for (const auto& w : sentence) out.push_back(ensemble_.vote(featurize(featurizer_, w)).distribution);
  return out;
}

std::string MemberTagger::name() const {
  return estimator_name(model_.ensemble().members().at(member_)) +
         (model_.is_ngrams() ? " (ngrams)" : " (vectors)");
}

std::vector<Distribution> MemberTagger::predict(const std::vector<std::string>& sentence) const {
  const Estimator& e = model_.ensemble().members().at(member_);
  std::vector<Distribution> out;
  for (const auto& w : sentence) out.push_back(predict_proba(e, featurize(model_.featurizer(), w)));
  return out;
}

EnsembleModel train_ensemble(const LabeledRows& data, const EnsembleOptions& opts,
                             EnsembleTrainReport* report) {
  LinearOptions lin = opts.linear;
  lin.seed = opts.seed;
  MlpOptions mlp = opts.mlp;
  mlp.seed = opts.seed;
  std::vector<Estimator> members;
  members.emplace_back(train_linear(data, LossKind::hinge, lin, report ? &report->hinge : nullptr));
  members.emplace_back(train_mlp(data, mlp, report ? &report->mlp : nullptr));
  members.emplace_back(
      train_linear(data, LossKind::logistic, lin, report ? &report->logistic : nullptr));
  if (report) {
    report->feature_dim = data.dim;
    report->rows = data.rows.size();
  }
  return EnsembleModel(std::move(members));
}

namespace {

template <typename RowFn>
LabeledRows rows_for(const AnnotatedDataset& ds, size_t dim, RowFn&& row_of) {
  LabeledRows data;
  data.dim = dim;
  std::unordered_map<std::string, SparseRow> cache;
  for (const auto& sentence : ds.sentences()) {
    for (const auto& tok : sentence) {
      auto it = cache.find(tok.word);
      if (it == cache.end()) it = cache.emplace(tok.word, row_of(tok.word)).first;
      data.rows.push_back(it->second);
      data.labels.push_back(tok.tag);
    }
  }
  return data;
}

}  // namespace

WordClassifier train_coli_ngrams(const AnnotatedDataset& train, const BpeModel& bpe,
                                 const FeatureTemplate& tmpl, const EnsembleOptions& opts,
                                 EnsembleTrainReport* report) {
  if (train.empty()) throw std::invalid_argument("train_coli_ngrams: empty training set");
  tmpl.validate();
  std::unordered_map<std::string, SparseFeatureVector> feats;
  std::vector<SparseFeatureVector> unique;
  for (const auto& sentence : train.sentences()) {
    for (const auto& tok : sentence) {
      if (feats.count(tok.word)) continue;
      auto fv = extract_features(tok.word, bpe, tmpl);
      unique.push_back(fv);
      feats.emplace(tok.word, std::move(fv));
    }
  }
  NgramFeaturizer f{tmpl, bpe, fit_vocabulary(unique)};
  LabeledRows data =
      rows_for(train, f.vocab.size(), [&](const std::string& w) { return vectorize(feats.at(w), f.vocab); });
  EnsembleModel ensemble = train_ensemble(data, opts, report);
  return WordClassifier(std::move(f), std::move(ensemble));
}

WordClassifier train_coli_vectors(const AnnotatedDataset& train, const EmbeddingSet& embeddings,
                                  const EnsembleOptions& opts, EnsembleTrainReport* report) {
  if (train.empty()) throw std::invalid_argument("train_coli_vectors: empty training set");
  VectorFeaturizer f{embeddings};
  Featurizer wrapped = f;
  LabeledRows data = rows_for(train, embeddings.layout.total_dim(),
                              [&](const std::string& w) { return featurize(wrapped, w); });
  EnsembleModel ensemble = train_ensemble(data, opts, report);
  return WordClassifier(std::move(wrapped), std::move(ensemble));
}

std::string serialize_word_classifier(const WordClassifier& model) {
  BinaryWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u8(model.is_ngrams() ? 0 : 1);
  w.u32(static_cast<uint32_t>(kNumTags));
  for (LanguageTag t : kAllTags) w.str(to_string(t));

  if (const auto* ng = std::get_if<NgramFeaturizer>(&model.featurizer())) {
    write_sizes(w, ng->tmpl.affix_lengths);
    write_sizes(w, ng->tmpl.word_ngram_sizes);
    write_sizes(w, ng->tmpl.subword_ngram_sizes);
    w.str(ng->tmpl.boundary_marker);
    w.str(format_bpe(ng->bpe));
    w.u32(static_cast<uint32_t>(ng->vocab.size()));
    for (const auto& f : ng->vocab.features()) w.str(f);
  } else {
    w.str(serialize_embeddings(std::get<VectorFeaturizer>(model.featurizer()).embeddings));
  }

  const auto& members = model.ensemble().members();
  w.u32(static_cast<uint32_t>(members.size()));
  for (const auto& m : members) write_estimator(w, m);
  return w.bytes();
}

WordClassifier deserialize_word_classifier(std::string_view bytes) {
  BinaryReader r(bytes);
  r.expect_magic(kMagic);
  const uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("model: unsupported version " + std::to_string(version));
  const uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("model: unknown featurizer kind");
  if (r.u32() != kNumTags) throw FormatError("model: class count mismatch");
  for (LanguageTag t : kAllTags) {
    if (r.str() != to_string(t)) throw FormatError("model: class order mismatch");
  }

  Featurizer featurizer;
  if (kind == 0) {
    NgramFeaturizer ng;
    ng.tmpl.affix_lengths = read_sizes(r);
    ng.tmpl.word_ngram_sizes = read_sizes(r);
    ng.tmpl.subword_ngram_sizes = read_sizes(r);
    ng.tmpl.boundary_marker = r.str();
    ng.bpe = parse_bpe(r.str());
    std::vector<std::string> features(r.u32());
    for (auto& f : features) f = r.str();
    ng.vocab = FeatureVocabulary(std::move(features));
    featurizer = std::move(ng);
  } else {
    featurizer = VectorFeaturizer{deserialize_embeddings(r.str())};
  }

  std::vector<Estimator> members(r.u32());
  try {
    for (auto& m : members) m = read_estimator(r);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  r.expect_end();
  const size_t dim = feature_dim(featurizer);
  for (const auto& m : members) {
    const size_t in = std::visit([](const auto& e) { return e.input_dim(); }, m);
    if (in != dim) throw FormatError("model: estimator input dim does not match featurizer");
  }
  return WordClassifier(std::move(featurizer), EnsembleModel(std::move(members)));
}

void save_word_classifier(const WordClassifier& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_word_classifier(model));
}

WordClassifier load_word_classifier(const std::filesystem::path& path) {
  return deserialize_word_classifier(read_file(path));
}

}  // namespace coli
