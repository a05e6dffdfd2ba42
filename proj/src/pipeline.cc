#include "coli/pipeline.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "coli/binary_io.h"
#include "coli/bpe.h"
#include "coli/corpus.h"
#include "coli/error.h"
#include "coli/metrics.h"

namespace coli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Type checks before conversion: nlohmann would silently wrap negative
// numbers into unsigned fields and truncate floats into integers.
bool has_type(const json& j, const uint64_t*) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<int64_t>() >= 0);
}
bool has_type(const json& j, const double*) { return j.is_number(); }
bool has_type(const json& j, const bool*) { return j.is_boolean(); }
bool has_type(const json& j, const std::string*) { return j.is_string(); }
template <typename T>
bool has_type(const json& j, const std::vector<T>*) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (!has_type(e, static_cast<const T*>(nullptr))) return false;
  }
  return true;
}

class JsonReader {
 public:
  explicit JsonReader(const json& root) {
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    frames_.push_back({&root, "", {}});
  }

  template <typename T>
  void field(const char* key, T& out) {
    Frame& f = frames_.back();
    f.seen.insert(key);
    auto it = f.obj->find(key);
    if (it == f.obj->end()) return;
    if (!has_type(*it, static_cast<const T*>(nullptr))) {
      throw ConfigError("config: " + f.path + key + " has the wrong type");
    }
    out = it->template get<T>();
  }

  void field(const char* key, fs::path& out) {
    std::string s = out.string();
    field(key, s);
    out = s;
  }

  template <typename F>
  void section(const char* key, F body) {
    Frame& parent = frames_.back();
    parent.seen.insert(key);
    auto it = parent.obj->find(key);
    const std::string path = parent.path + key + ".";
    if (it == parent.obj->end()) {
      frames_.push_back({&empty_, path, {}});
    } else {
      if (!it->is_object()) throw ConfigError("config: " + parent.path + key + " must be an object");
      frames_.push_back({&*it, path, {}});
    }
    body();
    finish_frame();
    frames_.pop_back();
  }

  void finish() { finish_frame(); }

 private:
  struct Frame {
    const json* obj;
    std::string path;
    std::set<std::string> seen;
  };

  void finish_frame() {
    const Frame& f = frames_.back();
    for (auto it = f.obj->begin(); it != f.obj->end(); ++it) {
      if (!f.seen.count(it.key())) throw ConfigError("config: unknown key " + f.path + it.key());
    }
  }

  std::vector<Frame> frames_;
  const json empty_ = json::object();
};

class JsonWriter {
 public:
  template <typename T>
  void field(const char* key, const T& v) {
    (*stack_.back())[key] = v;
  }
  void field(const char* key, const fs::path& p) { (*stack_.back())[key] = p.string(); }

  template <typename F>
  void section(const char* key, F body) {
    json& child = (*stack_.back())[key] = json::object();
    stack_.push_back(&child);
    body();
    stack_.pop_back();
  }

  json take() { return std::move(root_); }

 private:
  json root_ = json::object();
  std::vector<json*> stack_{&root_};
};

// One schema for both directions. size_t fields go through uint64_t.
template <typename C, typename V>
void visit_config(C& c, V& v) {
  auto num = [&v](const char* key, auto& field) {
    if constexpr (std::is_const_v<std::remove_reference_t<decltype(field)>>) {
      v.field(key, static_cast<uint64_t>(field));
    } else {
      uint64_t tmp = field;
      v.field(key, tmp);
      field = static_cast<std::remove_reference_t<decltype(field)>>(tmp);
    }
  };
  auto sizes = [&v](const char* key, auto& field) {
    if constexpr (std::is_const_v<std::remove_reference_t<decltype(field)>>) {
      v.field(key, std::vector<uint64_t>(field.begin(), field.end()));
    } else {
      std::vector<uint64_t> tmp(field.begin(), field.end());
      v.field(key, tmp);
      field.assign(tmp.begin(), tmp.end());
    }
  };

  num("seed", c.seed);
  v.section("paths", [&] {
    v.field("raw_corpus", c.raw_corpus);
    v.field("dataset", c.dataset);
    v.field("output_dir", c.output_dir);
  });
  v.section("preprocess", [&] {
    num("min_tokens", c.min_tokens);
    v.field("native_threshold", c.native_threshold);
    v.field("english_wordlist", c.english_wordlist);
    v.field("raw_fraction", c.raw_fraction);
  });
  v.section("bpe", [&] { num("vocab_size", c.bpe_vocab_size); });
  v.section("embeddings", [&] {
    num("word_dim", c.layout.word_dim);
    num("subword_dim", c.layout.subword_dim);
    num("char_dim", c.layout.char_dim);
    num("max_subwords", c.layout.max_subwords);
    num("max_chars", c.layout.max_chars);
    v.field("layout_from_corpus", c.layout_from_corpus);
    num("window", c.skipgram.window);
    num("negative_samples", c.skipgram.negative_samples);
    num("epochs", c.skipgram.epochs);
    v.field("learning_rate", c.skipgram.learning_rate);
    num("min_count", c.skipgram.min_count);
  });
  v.section("features", [&] {
    sizes("affix_lengths", c.features.affix_lengths);
    sizes("word_ngram_sizes", c.features.word_ngram_sizes);
    sizes("subword_ngram_sizes", c.features.subword_ngram_sizes);
    v.field("boundary_marker", c.features.boundary_marker);
  });
  v.section("split", [&] { v.field("train_fraction", c.train_fraction); });
  v.section("linear", [&] {
    v.field("lambda", c.linear.lambda);
    v.field("logistic_c", c.linear.logistic_c);
    num("epochs", c.linear.epochs);
    v.field("learning_rate", c.linear.learning_rate);
    v.field("tolerance", c.linear.tolerance);
    v.field("class_weights", c.linear.class_weights);
  });
  v.section("mlp", [&] {
    sizes("hidden", c.mlp.hidden);
    num("max_epochs", c.mlp.max_epochs);
    num("batch_size", c.mlp.batch_size);
    v.field("learning_rate", c.mlp.learning_rate);
    v.field("beta1", c.mlp.beta1);
    v.field("beta2", c.mlp.beta2);
    v.field("epsilon", c.mlp.epsilon);
    v.field("alpha", c.mlp.alpha);
    num("patience", c.mlp.patience);
    v.field("tolerance", c.mlp.tolerance);
    v.field("validation_fraction", c.mlp.validation_fraction);
    num("min_validation_rows", c.mlp.min_validation_rows);
    v.field("class_weights", c.mlp.class_weights);
  });
  v.section("bilstm", [&] {
    num("max_seq_len", c.bilstm.max_seq_len);
    num("projection_dim", c.bilstm.projection_dim);
    num("hidden", c.bilstm.hidden);
    num("epochs", c.bilstm.epochs);
    num("phase1_batch", c.bilstm.phase1_batch);
    num("phase2_batch", c.bilstm.phase2_batch);
    v.field("learning_rate", c.bilstm.learning_rate);
    v.field("beta1", c.bilstm.beta1);
    v.field("beta2", c.bilstm.beta2);
    v.field("epsilon", c.bilstm.epsilon);
    v.field("clip_norm", c.bilstm.clip_norm);
    v.field("trainable_embeddings", c.bilstm.trainable_embeddings);
  });
  v.field("models", c.models);
}

template <typename F>
auto run_stage(const std::string& name, F body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

bool wants(const PipelineConfig& c, const std::string& model) {
  return std::find(c.models.begin(), c.models.end(), model) != c.models.end();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

void require_file(const PipelineConfig& c, const fs::path& p, const std::string& what) {
  require(!p.empty(), what + " is required");
  require(fs::is_regular_file(c.resolve(p)), what + " not found: " + c.resolve(p).string());
}

nlohmann::ordered_json label_counts(const AnnotatedDataset& ds) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (size_t c = 0; c < kNumTags; ++c) j[std::string(to_string(kAllTags[c]))] = ds.label_counts()[c];
  return j;
}

}  // namespace

fs::path PipelineConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

PreprocessOptions PipelineConfig::preprocess_options() const {
  PreprocessOptions o;
  o.min_tokens = min_tokens;
  o.native_script_threshold = native_threshold;
  if (!english_wordlist.empty()) o.english_wordlist = load_wordlist(resolve(english_wordlist));
  return o;
}

EmbeddingOptions PipelineConfig::embedding_options() const {
  EmbeddingOptions o;
  o.skipgram = skipgram;
  o.skipgram.seed = seed;
  o.layout_from_corpus = layout_from_corpus;
  return o;
}

EnsembleOptions PipelineConfig::ensemble_options() const {
  EnsembleOptions o;
  o.linear = linear;
  o.mlp = mlp;
  o.seed = seed;
  return o;
}

BilstmConfig PipelineConfig::bilstm_config() const {
  BilstmConfig b = bilstm;
  b.seed = seed;
  return b;
}

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  c.base_dir = base_dir;
  JsonReader reader(j);
  visit_config(c, reader);
  reader.finish();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json config_to_json(const PipelineConfig& config) {
  JsonWriter writer;
  visit_config(config, writer);
  return writer.take();
}

void validate_config(const PipelineConfig& c) {
  require_file(c, c.raw_corpus, "paths.raw_corpus");
  require_file(c, c.dataset, "paths.dataset");
  require(!c.output_dir.empty(), "paths.output_dir is required");
  if (!c.english_wordlist.empty()) require_file(c, c.english_wordlist, "preprocess.english_wordlist");
  require(c.min_tokens >= 1, "preprocess.min_tokens must be >= 1");
  require(c.native_threshold > 0 && c.native_threshold <= 1,
          "preprocess.native_threshold must be in (0, 1]");
  require(c.raw_fraction > 0 && c.raw_fraction < 1, "preprocess.raw_fraction must be in (0, 1)");
  require(c.bpe_vocab_size >= 1, "bpe.vocab_size must be >= 1");
  require(c.layout.word_dim >= 1 && c.layout.subword_dim >= 1 && c.layout.char_dim >= 1,
          "embedding dimensions must be >= 1");
  require(c.skipgram.window >= 1 && c.skipgram.epochs >= 1 && c.skipgram.min_count >= 1,
          "embeddings.window, epochs and min_count must be >= 1");
  require(c.skipgram.learning_rate > 0, "embeddings.learning_rate must be > 0");
  try {
    c.features.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: features: ") + e.what());
  }
  require(c.train_fraction > 0 && c.train_fraction < 1, "split.train_fraction must be in (0, 1)");
  require(c.linear.epochs >= 1 && c.linear.learning_rate > 0 && c.linear.logistic_c > 0,
          "linear.epochs, learning_rate and logistic_c must be positive");
  require(c.mlp.batch_size >= 1 && c.mlp.max_epochs >= 1 && c.mlp.learning_rate > 0,
          "mlp.batch_size, max_epochs and learning_rate must be positive");
  for (size_t h : c.mlp.hidden) require(h >= 1, "mlp.hidden sizes must be >= 1");
  require(c.bilstm.hidden >= 1 && c.bilstm.epochs >= 1 && c.bilstm.max_seq_len >= 1 &&
              c.bilstm.phase1_batch >= 1 && c.bilstm.phase2_batch >= 1,
          "bilstm sizes must be >= 1");
  require(c.bilstm.learning_rate > 0 && c.bilstm.clip_norm > 0,
          "bilstm.learning_rate and clip_norm must be > 0");
  require(!c.models.empty(), "models must not be empty");
  std::set<std::string> seen;
  for (const auto& m : c.models) {
    require(m == "ngrams" || m == "vectors" || m == "bilstm", "unknown model '" + m + "'");
    require(seen.insert(m).second, "model '" + m + "' listed twice");
  }
}

std::string format_summary(const StageSummary& summary, bool as_json) {
  if (as_json) {
    nlohmann::ordered_json j;
    j["stage"] = summary.stage;
    for (auto it = summary.fields.begin(); it != summary.fields.end(); ++it) j[it.key()] = it.value();
    return j.dump();
  }
  std::string out = summary.stage + ":";
  for (auto it = summary.fields.begin(); it != summary.fields.end(); ++it) {
    out += ' ';
    out += it.key();
    out += '=';
    out += it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
  }
  return out;
}

void run_pipeline(const PipelineConfig& config, const SummarySink& sink) {
  run_stage("config", [&] { validate_config(config); });
  const fs::path out = config.resolve(config.output_dir);
  run_stage("config", [&] {
    fs::create_directories(out);
    write_file_atomic(out / "effective_config.json", config_to_json(config).dump(2) + "\n");
  });

  const std::vector<Sentence> raw = run_stage("preprocess", [&] {
    const IngestResult in = ingest(config.resolve(config.raw_corpus));
    const PreprocessResult pre = preprocess(in.comments, config.preprocess_options());
    const RawPoolSplit split = split_raw_annotation_pool(pre.sentences, config.raw_fraction, config.seed);
    write_sentences(split.raw, out / "raw_sentences.txt");
    write_sentences(split.pool, out / "annotation_pool.txt");
    StageSummary s{"preprocess"};
    s.fields["comments"] = in.comments.size();
    s.fields["invalid_utf8"] = in.invalid_utf8;
    s.fields["dropped_duplicate"] = pre.dropped_duplicate;
    s.fields["dropped_native_script"] = pre.dropped_native_script;
    s.fields["dropped_english_only"] = pre.dropped_english_only;
    s.fields["dropped_short"] = pre.dropped_short;
    s.fields["sentences"] = pre.sentences.size();
    s.fields["raw"] = split.raw.size();
    s.fields["pool"] = split.pool.size();
    sink(s);
    return split.raw;
  });

  const BpeModel bpe = run_stage("train-bpe", [&] {
    BpeModel m = train_bpe(raw, config.bpe_vocab_size);
    save_bpe(m, out / "bpe.model");
    StageSummary s{"train-bpe"};
    s.fields["alphabet"] = m.alphabet().size();
    s.fields["merges"] = m.merges().size();
    s.fields["vocab"] = m.vocab().size();
    sink(s);
    return m;
  });

  EmbeddingSet embeddings;
  if (wants(config, "vectors") || wants(config, "bilstm")) {
    embeddings = run_stage("train-embeddings", [&] {
      EmbeddingSet e = build_embedding_set(raw, bpe, config.layout, config.embedding_options());
      save_embeddings(e, out / "embeddings.bin");
      StageSummary s{"train-embeddings"};
      s.fields["words"] = e.words.size();
      s.fields["subwords"] = e.subwords.size();
      s.fields["chars"] = e.chars.size();
      s.fields["merged_dim"] = e.layout.total_dim();
      sink(s);
      return e;
    });
  }

  const TrainTestSplit split = run_stage("split", [&] {
    TrainTestSplit sp = split_train_test(read_dataset(config.resolve(config.dataset)),
                                         config.train_fraction, config.seed);
    write_dataset(sp.train, out / "train.conll");
    write_dataset(sp.test, out / "test.conll");
    StageSummary s{"split"};
    s.fields["train_sentences"] = sp.train.sentences().size();
    s.fields["train_tokens"] = sp.train.token_count();
    s.fields["test_sentences"] = sp.test.sentences().size();
    s.fields["test_tokens"] = sp.test.token_count();
    s.fields["train_labels"] = label_counts(sp.train);
    sink(s);
    return sp;
  });

  auto ensemble_summary = [&](const std::string& stage, const EnsembleTrainReport& r) {
    StageSummary s{stage};
    s.fields["rows"] = r.rows;
    s.fields["feature_dim"] = r.feature_dim;
    s.fields["mlp_epochs"] = r.mlp.epochs_run;
    s.fields["logistic_epochs"] = r.logistic.epochs_run;
    std::vector<std::string> warnings = r.hinge.warnings;
    warnings.insert(warnings.end(), r.mlp.warnings.begin(), r.mlp.warnings.end());
    warnings.insert(warnings.end(), r.logistic.warnings.begin(), r.logistic.warnings.end());
    s.fields["warnings"] = warnings;
    sink(s);
  };

  std::vector<std::unique_ptr<WordClassifier>> classifiers;
  if (wants(config, "ngrams")) {
    classifiers.push_back(run_stage("train-ngrams", [&] {
      EnsembleTrainReport r;
      auto m = std::make_unique<WordClassifier>(
          train_coli_ngrams(split.train, bpe, config.features, config.ensemble_options(), &r));
      save_word_classifier(*m, out / "ngrams.model");
      ensemble_summary("train-ngrams", r);
      return m;
    }));
  }
  if (wants(config, "vectors")) {
    classifiers.push_back(run_stage("train-vectors", [&] {
      EnsembleTrainReport r;
      auto m = std::make_unique<WordClassifier>(
          train_coli_vectors(split.train, embeddings, config.ensemble_options(), &r));
      save_word_classifier(*m, out / "vectors.model");
      ensemble_summary("train-vectors", r);
      return m;
    }));
  }
  std::unique_ptr<BilstmTagger> bilstm;
  if (wants(config, "bilstm")) {
    bilstm = run_stage("train-bilstm", [&] {
      BilstmTrainReport r;
      auto t = std::make_unique<BilstmTagger>(
          train_bilstm(split.train, embeddings, config.bilstm_config(), &r), embeddings);
      save_bilstm(*t, out / "bilstm.model");
      StageSummary s{"train-bilstm"};
      s.fields["vocab"] = t->model().vocabulary().size();
      s.fields["lstm_parameters"] = t->model().lstm_parameter_count();
      s.fields["initial_loss"] = r.initial_loss;
      s.fields["final_loss"] = r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back();
      s.fields["truncated_sentences"] = r.truncated_sentences;
      sink(s);
      return t;
    });
  }

  run_stage("evaluate", [&] {
    std::vector<ModelResult> results;
    StageSummary s{"evaluate"};
    auto add = [&](const Tagger& t) {
      results.push_back({t.name(), evaluate(t, split.test).metrics});
      s.fields[t.name()] = results.back().metrics.macro_f1;
    };
    for (const auto& c : classifiers) {
      add(*c);
      for (size_t m = 0; m < c->ensemble().members().size(); ++m) add(MemberTagger(*c, m));
    }
    if (bilstm) add(*bilstm);
    write_file_atomic(out / "report.tsv", format_report_tsv(results));
    write_file_atomic(out / "report.txt", format_report_text(results));
    sink(s);
  });
}

std::unique_ptr<Tagger> load_tagger(const fs::path& path) {
  const std::string bytes = read_file(path);
  const std::string_view magic = std::string_view(bytes).substr(0, 4);
  if (magic == "CMLM") return std::make_unique<WordClassifier>(deserialize_word_classifier(bytes));
  if (magic == "CMBL") return std::make_unique<BilstmTagger>(deserialize_bilstm(bytes));
  throw FormatError(path.string() + ": not a coli model file");
}

}  // namespace coli
