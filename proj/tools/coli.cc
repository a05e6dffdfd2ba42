// coli: word-level language identification for code-mixed Kannada-English.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>

#include "coli/bilstm.h"
#include "coli/binary_io.h"
#include "coli/bpe.h"
#include "coli/corpus.h"
#include "coli/embeddings.h"
#include "coli/ensemble.h"
#include "coli/error.h"
#include "coli/metrics.h"
#include "coli/pipeline.h"
#include "coli/synth.h"

namespace {

namespace fs = std::filesystem;
using coli::StageSummary;

constexpr const char* kVersion = "coli 1.0.0";

// Bad invocations that CLI11 cannot catch on its own (flag combinations).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool json_summary = false;
};

void emit(const Globals& g, const StageSummary& s) {
  std::cout << coli::format_summary(s, g.json_summary) << '\n';
}

struct PreprocessArgs {
  std::string input, output, pool, wordlist;
  size_t min_tokens = 3;
  double native_threshold = 0.8;
  double raw_fraction = 0.9;
  uint64_t seed = 1;
};

void run_preprocess(const PreprocessArgs& a, const Globals& g) {
  coli::PreprocessOptions opts;
  opts.min_tokens = a.min_tokens;
  opts.native_script_threshold = a.native_threshold;
  if (!a.wordlist.empty()) opts.english_wordlist = coli::load_wordlist(a.wordlist);
  const auto in = coli::ingest(a.input);
  const auto pre = coli::preprocess(in.comments, opts);
  const auto split = coli::split_raw_annotation_pool(pre.sentences, a.raw_fraction, a.seed);
  const std::string pool = a.pool.empty() ? a.output + ".pool" : a.pool;
  coli::write_sentences(split.raw, a.output);
  coli::write_sentences(split.pool, pool);
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
  emit(g, s);
}

struct BpeArgs {
  std::string input, output;
  size_t vocab_size = 10000;
};

void run_train_bpe(const BpeArgs& a, const Globals& g) {
  const auto model = coli::train_bpe(coli::read_sentences(a.input), a.vocab_size);
  coli::save_bpe(model, a.output);
  StageSummary s{"train-bpe"};
  s.fields["alphabet"] = model.alphabet().size();
  s.fields["merges"] = model.merges().size();
  s.fields["vocab"] = model.vocab().size();
  emit(g, s);
}

struct EmbeddingArgs {
  std::string input, bpe, output;
  coli::MergeLayout layout;
  bool layout_from_corpus = false;
  coli::SkipgramOptions skipgram;
};

void run_train_embeddings(const EmbeddingArgs& a, const Globals& g) {
  coli::EmbeddingOptions opts;
  opts.skipgram = a.skipgram;
  opts.layout_from_corpus = a.layout_from_corpus;
  const auto set = coli::build_embedding_set(coli::read_sentences(a.input), coli::load_bpe(a.bpe),
                                             a.layout, opts);
  coli::save_embeddings(set, a.output);
  StageSummary s{"train-embeddings"};
  s.fields["words"] = set.words.size();
  s.fields["subwords"] = set.subwords.size();
  s.fields["chars"] = set.chars.size();
  s.fields["merged_dim"] = set.layout.total_dim();
  emit(g, s);
}

struct TrainArgs {
  std::string model, train, bpe, embeddings, output, config;
  uint64_t seed = 1;
  size_t epochs = 0, seq_len = 0, hidden = 0;  // 0 keeps the configured value
};

void run_train(const TrainArgs& a, const Globals& g) {
  if (a.model == "ngrams" && a.bpe.empty()) {
    throw UsageError("--bpe is required for --model ngrams");
  }
  if ((a.model == "vectors" || a.model == "bilstm") && a.embeddings.empty()) {
    throw UsageError("--embeddings is required for --model " + a.model);
  }
  coli::PipelineConfig cfg;
  if (!a.config.empty()) cfg = coli::load_config(a.config);
  cfg.seed = a.seed;
  const auto train = coli::read_dataset(a.train);

  StageSummary s{"train"};
  s.fields["model"] = a.model;
  s.fields["sentences"] = train.sentences().size();
  s.fields["tokens"] = train.token_count();
  if (a.model == "bilstm") {
    coli::BilstmConfig bc = cfg.bilstm_config();
    if (a.epochs) bc.epochs = a.epochs;
    if (a.seq_len) bc.max_seq_len = a.seq_len;
    if (a.hidden) bc.hidden = a.hidden;
    auto embeddings = coli::load_embeddings(a.embeddings);
    coli::BilstmTrainReport r;
    auto model = coli::train_bilstm(train, embeddings, bc, &r);
    const coli::BilstmTagger tagger(std::move(model), std::move(embeddings));
    coli::save_bilstm(tagger, a.output);
    s.fields["vocab"] = tagger.model().vocabulary().size();
    s.fields["lstm_parameters"] = tagger.model().lstm_parameter_count();
    s.fields["initial_loss"] = r.initial_loss;
    s.fields["final_loss"] = r.epoch_loss.empty() ? r.initial_loss : r.epoch_loss.back();
    s.fields["truncated_sentences"] = r.truncated_sentences;
  } else {
    coli::EnsembleTrainReport r;
    const auto model =
        a.model == "ngrams"
            ? coli::train_coli_ngrams(train, coli::load_bpe(a.bpe), cfg.features,
                                      cfg.ensemble_options(), &r)
            : coli::train_coli_vectors(train, coli::load_embeddings(a.embeddings),
                                       cfg.ensemble_options(), &r);
    coli::save_word_classifier(model, a.output);
    s.fields["feature_dim"] = r.feature_dim;
    s.fields["rows"] = r.rows;
    s.fields["mlp_epochs"] = r.mlp.epochs_run;
    for (const auto* tr : {&r.hinge, &r.logistic, &r.mlp}) {
      for (const auto& w : tr->warnings) std::cerr << "warning: " << w << '\n';
    }
  }
  emit(g, s);
}

struct PredictArgs {
  std::string model, input, output;
};

void run_predict(const PredictArgs& a, const Globals& g) {
  const auto tagger = coli::load_tagger(a.model);
  std::istringstream in(coli::read_file(a.input));
  coli::AnnotatedDataset tagged;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) continue;
    const auto tags = coli::tag_words(*tagger, tokens);
    coli::AnnotatedSentence s;
    for (size_t i = 0; i < tokens.size(); ++i) s.push_back({tokens[i], tags[i]});
    tagged.add_sentence(std::move(s));
  }
  coli::write_dataset(tagged, a.output);
  StageSummary s{"predict"};
  s.fields["model"] = tagger->name();
  s.fields["sentences"] = tagged.sentences().size();
  s.fields["tokens"] = tagged.token_count();
  emit(g, s);
}

struct EvaluateArgs {
  std::string model, test, output;
};

void run_evaluate(const EvaluateArgs& a, const Globals& g) {
  const auto tagger = coli::load_tagger(a.model);
  const auto result = coli::evaluate(*tagger, coli::read_dataset(a.test));
  const std::vector<coli::ModelResult> results{{tagger->name(), result.metrics}};
  coli::write_file_atomic(a.output, coli::format_report_tsv(results));
  StageSummary s{"evaluate"};
  s.fields["model"] = tagger->name();
  s.fields["tokens"] = result.confusion.total();
  s.fields["macro_precision"] = result.metrics.macro_precision;
  s.fields["macro_recall"] = result.metrics.macro_recall;
  s.fields["macro_f1"] = result.metrics.macro_f1;
  emit(g, s);
}

struct SynthArgs {
  std::vector<std::string> output;
  coli::SynthOptions opts;
  bool no_noise = false;
};

void run_synth(const SynthArgs& a, const Globals& g) {
  if (a.output.size() != 2) throw UsageError("--output takes two paths: <raw>,<dataset>");
  coli::SynthOptions opts = a.opts;
  opts.noise = !a.no_noise;
  const auto corpus = coli::generate_synthetic(opts);
  coli::write_lines(corpus.raw_lines, a.output[0]);
  coli::write_dataset(corpus.dataset, a.output[1]);
  StageSummary s{"synth"};
  s.fields["raw_lines"] = corpus.raw_lines.size();
  s.fields["sentences"] = corpus.dataset.sentences().size();
  s.fields["tokens"] = corpus.dataset.token_count();
  emit(g, s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-level language identification for code-mixed Kannada-English text", "coli"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_flag("--json-summary", globals.json_summary, "Print stage summaries as JSON lines");

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Clean raw comments into sentences");
  c_pre->add_option("--input", pre.input, "Raw corpus, one comment per line")->required();
  c_pre->add_option("--output", pre.output, "Raw-text sentences")->required();
  c_pre->add_option("--pool", pre.pool, "Annotation pool sentences (default <output>.pool)");
  c_pre->add_option("--min-tokens", pre.min_tokens)->capture_default_str();
  c_pre->add_option("--native-threshold", pre.native_threshold)->capture_default_str();
  c_pre->add_option("--english-wordlist", pre.wordlist, "Drop comments made only of these words");
  c_pre->add_option("--seed", pre.seed)->capture_default_str();
  c_pre->add_option("--raw-fraction", pre.raw_fraction)->capture_default_str();

  BpeArgs bpe;
  auto* c_bpe = app.add_subcommand("train-bpe", "Learn a BPE sub-word model");
  c_bpe->add_option("--input", bpe.input, "Sentences, one per line")->required();
  c_bpe->add_option("--vocab-size", bpe.vocab_size)->capture_default_str();
  c_bpe->add_option("--output", bpe.output)->required();

  EmbeddingArgs emb;
  auto* c_emb = app.add_subcommand("train-embeddings", "Train word, sub-word and char vectors");
  c_emb->add_option("--input", emb.input, "Sentences, one per line")->required();
  c_emb->add_option("--bpe", emb.bpe)->required();
  c_emb->add_option("--output", emb.output)->required();
  c_emb->add_option("--word-dim", emb.layout.word_dim)->capture_default_str();
  c_emb->add_option("--subword-dim", emb.layout.subword_dim)->capture_default_str();
  c_emb->add_option("--char-dim", emb.layout.char_dim)->capture_default_str();
  c_emb->add_option("--max-subwords", emb.layout.max_subwords)->capture_default_str();
  c_emb->add_option("--max-chars", emb.layout.max_chars)->capture_default_str();
  c_emb->add_flag("--layout-from-corpus", emb.layout_from_corpus,
                  "Size the slot counts from corpus maxima");
  c_emb->add_option("--epochs", emb.skipgram.epochs)->capture_default_str();
  c_emb->add_option("--window", emb.skipgram.window)->capture_default_str();
  c_emb->add_option("--negatives", emb.skipgram.negative_samples)->capture_default_str();
  c_emb->add_option("--seed", emb.skipgram.seed)->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train CoLI-ngrams, CoLI-vectors or CoLI-BiLSTM");
  c_train->add_option("--model", train.model)
      ->required()
      ->check(CLI::IsMember({"ngrams", "vectors", "bilstm"}));
  c_train->add_option("--train", train.train, "Annotated training set")->required();
  c_train->add_option("--bpe", train.bpe, "BPE model (ngrams)");
  c_train->add_option("--embeddings", train.embeddings, "Embedding set (vectors, bilstm)");
  c_train->add_option("--output", train.output)->required();
  c_train->add_option("--seed", train.seed)->capture_default_str();
  c_train->add_option("--config", train.config, "Pipeline config supplying hyperparameters");
  c_train->add_option("--epochs", train.epochs, "BiLSTM epochs");
  c_train->add_option("--seq-len", train.seq_len, "BiLSTM maximum sequence length");
  c_train->add_option("--hidden", train.hidden, "BiLSTM hidden units per direction");

  PredictArgs pred;
  auto* c_pred = app.add_subcommand("predict", "Tag tokenized sentences");
  c_pred->add_option("--model", pred.model)->required();
  c_pred->add_option("--input", pred.input, "One whitespace-tokenized sentence per line")
      ->required();
  c_pred->add_option("--output", pred.output, "Tagged output in dataset format")->required();

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a model on an annotated test set");
  c_eval->add_option("--model", ev.model)->required();
  c_eval->add_option("--test", ev.test)->required();
  c_eval->add_option("--output", ev.output, "Report TSV")->required();

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Generate a synthetic corpus");
  c_syn->add_option("--sentences", syn.opts.sentences)->capture_default_str();
  c_syn->add_option("--raw-comments", syn.opts.raw_comments, "Raw lines (default: --sentences)");
  c_syn->add_option("--seed", syn.opts.seed)->capture_default_str();
  c_syn->add_option("--output", syn.output, "<raw>,<dataset>")->required()->delimiter(',');
  c_syn->add_flag("--no-noise", syn.no_noise, "Omit duplicate, Kannada-script and short lines");

  std::string config_path;
  bool dump_config = false;
  auto* c_pipe = app.add_subcommand("pipeline", "Run every stage from one config");
  c_pipe->add_option("--config", config_path, "JSON config")->required();
  c_pipe->add_flag("--print-config", dump_config, "Print the effective config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string stage = cmd->get_name();
  try {
    if (cmd == c_pre) run_preprocess(pre, globals);
    if (cmd == c_bpe) run_train_bpe(bpe, globals);
    if (cmd == c_emb) run_train_embeddings(emb, globals);
    if (cmd == c_train) run_train(train, globals);
    if (cmd == c_pred) run_predict(pred, globals);
    if (cmd == c_eval) run_evaluate(ev, globals);
    if (cmd == c_syn) run_synth(syn, globals);
    if (cmd == c_pipe) {
      const auto cfg = coli::load_config(config_path);
      if (dump_config) {
        std::cout << coli::config_to_json(cfg).dump(2) << '\n';
        return 0;
      }
      coli::run_pipeline(cfg, [&](const StageSummary& s) { emit(globals, s); });
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << cmd->help();
    return 2;
  } catch (const coli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const coli::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: stage " << stage << " failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
