#include "coli/bilstm.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "coli/binary_io.h"
#include "coli/error.h"
#include "coli/random.h"

namespace coli {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::string_view kMagic = "CMBL";
constexpr uint32_t kVersion = 1;

MatrixXd glorot(Index rows, Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

LstmParams init_lstm(size_t input_dim, size_t hidden, Rng& rng) {
  const auto H = static_cast<Index>(hidden);
  LstmParams p;
  p.input = glorot(4 * H, static_cast<Index>(input_dim), rng);
  p.recurrent = glorot(4 * H, H, rng);
  p.bias = VectorXd::Zero(4 * H);
  p.bias.segment(H, H).setOnes();  // forget gate
  return p;
}

VectorXd sigmoid(const VectorXd& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

struct LstmTrace {
  MatrixXd gates;      // 4H x len, activated
  MatrixXd cell;       // H x len
  MatrixXd cell_tanh;  // H x len
  MatrixXd hidden;     // H x len
};

// Position processed just before `t`, or -1 at the start.
Index previous(Index t, Index len, bool reverse) {
  if (reverse) return t + 1 < len ? t + 1 : -1;
  return t > 0 ? t - 1 : -1;
}

LstmTrace run_lstm(const LstmParams& p, const MatrixXd& X, bool reverse) {
  const Index len = X.cols();
  const Index H = p.recurrent.cols();
  const MatrixXd pre = (p.input * X).colwise() + p.bias;
  LstmTrace tr{MatrixXd(4 * H, len), MatrixXd(H, len), MatrixXd(H, len), MatrixXd(H, len)};
  VectorXd h = VectorXd::Zero(H);
  VectorXd c = VectorXd::Zero(H);
  for (Index k = 0; k < len; ++k) {
    const Index t = reverse ? len - 1 - k : k;
    const VectorXd a = pre.col(t) + p.recurrent * h;
    const VectorXd i = sigmoid(a.segment(0, H));
    const VectorXd f = sigmoid(a.segment(H, H));
    const VectorXd g = a.segment(2 * H, H).array().tanh();
    const VectorXd o = sigmoid(a.segment(3 * H, H));
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    const VectorXd tc = c.array().tanh();
    h = o.cwiseProduct(tc);
    tr.gates.col(t) << i, f, g, o;
    tr.cell.col(t) = c;
    tr.cell_tanh.col(t) = tc;
    tr.hidden.col(t) = h;
  }
  return tr;
}

// Backpropagation through time; accumulates into `g` and returns dL/dX.
MatrixXd backprop_lstm(const LstmParams& p, const MatrixXd& X, const LstmTrace& tr,
                       const MatrixXd& dH, bool reverse, LstmParams& g) {
  const Index len = X.cols();
  const Index H = p.recurrent.cols();
  MatrixXd DA(4 * H, len);
  MatrixXd h_prev = MatrixXd::Zero(H, len);
  VectorXd dh_next = VectorXd::Zero(H);
  VectorXd dc_next = VectorXd::Zero(H);
  for (Index k = len - 1; k >= 0; --k) {
    const Index t = reverse ? len - 1 - k : k;
    const Index prev = previous(t, len, reverse);
    const auto i = tr.gates.col(t).segment(0, H).array();
    const auto f = tr.gates.col(t).segment(H, H).array();
    const auto gc = tr.gates.col(t).segment(2 * H, H).array();
    const auto o = tr.gates.col(t).segment(3 * H, H).array();
    const auto tc = tr.cell_tanh.col(t).array();
    const VectorXd c_prev = prev >= 0 ? VectorXd(tr.cell.col(prev)) : VectorXd::Zero(H);

    const VectorXd dh = dH.col(t) + dh_next;
    const VectorXd dc = (dh.array() * o * (1.0 - tc.square())).matrix() + dc_next;
    auto da = DA.col(t);
    da.segment(0, H) = (dc.array() * gc * i * (1.0 - i)).matrix();
    da.segment(H, H) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
    da.segment(2 * H, H) = (dc.array() * i * (1.0 - gc.square())).matrix();
    da.segment(3 * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dc_next = dc.cwiseProduct(f.matrix());
    dh_next = p.recurrent.transpose() * da;
    if (prev >= 0) h_prev.col(t) = tr.hidden.col(prev);
  }
  g.input.noalias() += DA * X.transpose();
  g.recurrent.noalias() += DA * h_prev.transpose();
  g.bias += DA.rowwise().sum();
  return p.input.transpose() * DA;
}

void softmax_columns(MatrixXd& Z) {
  for (Index c = 0; c < Z.cols(); ++c) {
    auto col = Z.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp();
    col /= col.sum();
  }
}

MatrixXd gather_inputs(const BilstmModel& model, const PaddedBatch& batch, size_t b, size_t len) {
  const auto& emb = model.params().embedding;
  const auto V = static_cast<int64_t>(emb.cols());
  MatrixXd X(emb.rows(), static_cast<Index>(len));
  for (size_t t = 0; t < len; ++t) {
    const int64_t id = batch.tokens[batch.at(b, t)];
    if (id < 0) throw std::invalid_argument("bilstm: negative token id");
    if (id < V) {
      X.col(static_cast<Index>(t)) = emb.col(id);
    } else {
      const auto extra = static_cast<size_t>(id - V);
      if (extra >= batch.extra.size()) throw std::invalid_argument("bilstm: token id out of range");
      X.col(static_cast<Index>(t)) = batch.extra[extra];
    }
  }
  return X;
}

MatrixXd project(const BilstmParams& p, const MatrixXd& X) {
  return p.projection.size() ? MatrixXd(p.projection * X) : X;
}

struct SequencePass {
  MatrixXd inputs;     // merged-dim x len
  MatrixXd projected;  // E x len
  LstmTrace fwd;
  LstmTrace bwd;
  MatrixXd hidden;  // 2H x len
  MatrixXd probs;   // 7 x len
};

SequencePass run_sequence(const BilstmModel& model, const PaddedBatch& batch, size_t b,
                          size_t len) {
  const BilstmParams& p = model.params();
  SequencePass s;
  s.inputs = gather_inputs(model, batch, b, len);
  s.projected = project(p, s.inputs);
  s.fwd = run_lstm(p.forward, s.projected, false);
  s.bwd = run_lstm(p.backward, s.projected, true);
  s.hidden.resize(2 * s.fwd.hidden.rows(), static_cast<Index>(len));
  s.hidden << s.fwd.hidden, s.bwd.hidden;
  s.probs = (p.output * s.hidden).colwise() + p.output_bias;
  softmax_columns(s.probs);
  return s;
}

void validate_batch(const PaddedBatch& batch) {
  const size_t n = batch.batch * batch.steps;
  if (batch.tokens.size() != n || batch.tags.size() != n || batch.mask.size() != n) {
    throw std::invalid_argument("bilstm: batch arrays do not match batch x steps");
  }
}

std::vector<std::pair<double*, size_t>> tensors(BilstmParams& p) {
  std::vector<std::pair<double*, size_t>> out;
  p.for_each([&](auto& m) { out.emplace_back(m.data(), static_cast<size_t>(m.size())); });
  return out;
}

void write_tensor(BinaryWriter& w, const auto& m) {
  w.u32(static_cast<uint32_t>(m.rows()));
  w.u32(static_cast<uint32_t>(m.cols()));
  w.f64s({m.data(), static_cast<size_t>(m.size())});
}

}  // namespace

BilstmParams BilstmParams::zeros_like() const {
  BilstmParams z = *this;
  z.for_each([](auto& m) { m.setZero(); });
  return z;
}

BilstmModel::BilstmModel(const BilstmConfig& config, const EmbeddingSet& embeddings,
                         std::vector<std::string> words)
    : config_(config), words_(std::move(words)) {
  if (config_.hidden == 0) throw std::invalid_argument("bilstm: hidden must be >= 1");
  const size_t merged = embeddings.layout.total_dim();
  Rng rng(config_.seed);
  params_.embedding.resize(static_cast<Index>(merged), static_cast<Index>(words_.size()));
  for (size_t j = 0; j < words_.size(); ++j) {
    if (!ids_.emplace(words_[j], static_cast<uint32_t>(j)).second) {
      throw std::invalid_argument("bilstm: duplicate vocabulary word");
    }
    const auto mv = merge_vector(embeddings, words_[j]);
    for (size_t i = 0; i < merged; ++i) {
      params_.embedding(static_cast<Index>(i), static_cast<Index>(j)) = mv.values[i];
    }
  }
  size_t lstm_in = merged;
  if (config_.projection_dim > 0) {
    params_.projection = glorot(static_cast<Index>(config_.projection_dim),
                                static_cast<Index>(merged), rng);
    lstm_in = config_.projection_dim;
  } else {
    params_.projection.resize(0, 0);
  }
  params_.forward = init_lstm(lstm_in, config_.hidden, rng);
  params_.backward = init_lstm(lstm_in, config_.hidden, rng);
  params_.output = glorot(kBilstmClasses, 2 * static_cast<Index>(config_.hidden), rng);
  params_.output_bias = VectorXd::Zero(kBilstmClasses);
}

BilstmModel::BilstmModel(const BilstmConfig& config, std::vector<std::string> words,
                         BilstmParams params)
    : config_(config), words_(std::move(words)), params_(std::move(params)) {
  for (size_t j = 0; j < words_.size(); ++j) {
    if (!ids_.emplace(words_[j], static_cast<uint32_t>(j)).second) {
      throw std::invalid_argument("bilstm: duplicate vocabulary word");
    }
  }
  const Index H = params_.forward.recurrent.cols();
  const auto E = static_cast<Index>(lstm_input_dim());
  auto check = [](bool ok) {
    if (!ok) throw std::invalid_argument("bilstm: inconsistent parameter shapes");
  };
  check(params_.embedding.cols() == static_cast<Index>(words_.size()));
  check(params_.projection.size() == 0 || params_.projection.cols() == params_.embedding.rows());
  for (const LstmParams* l : {&params_.forward, &params_.backward}) {
    check(l->input.rows() == 4 * H && l->input.cols() == E);
    check(l->recurrent.rows() == 4 * H && l->recurrent.cols() == H);
    check(l->bias.size() == 4 * H);
  }
  check(params_.output.rows() == static_cast<Index>(kBilstmClasses) && params_.output.cols() == 2 * H);
  check(params_.output_bias.size() == static_cast<Index>(kBilstmClasses));
  bool finite = true;
  params_.for_each([&](const auto& m) { finite = finite && m.allFinite(); });
  check(finite);
}

size_t BilstmModel::lstm_input_dim() const {
  return static_cast<size_t>(params_.projection.size() ? params_.projection.rows()
                                                       : params_.embedding.rows());
}

int64_t BilstmModel::word_id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? -1 : static_cast<int64_t>(it->second);
}

uint64_t BilstmModel::lstm_parameter_count() const {
  uint64_t n = 0;
  for (const LstmParams* l : {&params_.forward, &params_.backward}) {
    n += static_cast<uint64_t>(l->input.size() + l->recurrent.size() + l->bias.size());
  }
  return n;
}

bool BilstmModel::operator==(const BilstmModel& o) const {
  if (words_ != o.words_) return false;
  std::vector<const double*> a, b;
  std::vector<std::pair<Index, Index>> sa, sb;
  params_.for_each([&](const auto& m) {
    a.push_back(m.data());
    sa.emplace_back(m.rows(), m.cols());
  });
  o.params_.for_each([&](const auto& m) {
    b.push_back(m.data());
    sb.emplace_back(m.rows(), m.cols());
  });
  if (sa != sb) return false;
  for (size_t k = 0; k < a.size(); ++k) {
    const auto n = static_cast<size_t>(sa[k].first * sa[k].second);
    if (!std::equal(a[k], a[k] + n, b[k])) return false;
  }
  return true;
}

size_t PaddedBatch::length(size_t b) const {
  size_t len = 0;
  while (len < steps && mask[at(b, len)]) ++len;
  return len;
}

PaddedBatch make_batch(const std::vector<std::vector<int64_t>>& tokens,
                       const std::vector<std::vector<uint8_t>>& tags, size_t steps) {
  if (tokens.size() != tags.size()) throw std::invalid_argument("make_batch: size mismatch");
  PaddedBatch batch;
  batch.batch = tokens.size();
  batch.steps = steps;
  batch.tokens.assign(batch.batch * steps, 0);
  batch.tags.assign(batch.batch * steps, kPadClass);
  batch.mask.assign(batch.batch * steps, 0);
  for (size_t b = 0; b < tokens.size(); ++b) {
    if (tokens[b].size() != tags[b].size()) throw std::invalid_argument("make_batch: ragged row");
    const size_t len = std::min(steps, tokens[b].size());
    for (size_t t = 0; t < len; ++t) {
      batch.tokens[batch.at(b, t)] = tokens[b][t];
      batch.tags[batch.at(b, t)] = tags[b][t];
      batch.mask[batch.at(b, t)] = 1;
    }
  }
  return batch;
}

HiddenStates bilstm_hidden(const BilstmModel& model, const Eigen::MatrixXd& inputs) {
  const BilstmParams& p = model.params();
  return {run_lstm(p.forward, inputs, false).hidden, run_lstm(p.backward, inputs, true).hidden};
}

std::vector<StepDistribution> bilstm_forward(const BilstmModel& model, const PaddedBatch& batch) {
  validate_batch(batch);
  const BilstmParams& p = model.params();
  VectorXd pad_probs = p.output_bias;
  pad_probs.array() -= pad_probs.maxCoeff();
  pad_probs = pad_probs.array().exp();
  pad_probs /= pad_probs.sum();

  std::vector<StepDistribution> out(batch.batch * batch.steps);
  for (size_t b = 0; b < batch.batch; ++b) {
    const size_t len = batch.length(b);
    MatrixXd probs;
    if (len > 0) probs = run_sequence(model, batch, b, len).probs;
    for (size_t t = 0; t < batch.steps; ++t) {
      auto& d = out[batch.at(b, t)];
      for (size_t c = 0; c < kBilstmClasses; ++c) {
        d[c] = t < len ? probs(static_cast<Index>(c), static_cast<Index>(t))
                       : pad_probs[static_cast<Index>(c)];
      }
    }
  }
  return out;
}

double bilstm_loss(const BilstmModel& model, const PaddedBatch& batch, BilstmParams* grad) {
  validate_batch(batch);
  const BilstmParams& p = model.params();
  if (grad) *grad = p.zeros_like();
  const auto V = static_cast<int64_t>(p.embedding.cols());

  size_t tokens = 0;
  for (size_t b = 0; b < batch.batch; ++b) tokens += batch.length(b);
  if (tokens == 0) return 0.0;
  const double norm = 1.0 / static_cast<double>(tokens);

  double loss = 0;
  for (size_t b = 0; b < batch.batch; ++b) {
    const size_t len = batch.length(b);
    if (len == 0) continue;
    SequencePass s = run_sequence(model, batch, b, len);
    MatrixXd dZ = s.probs;
    for (size_t t = 0; t < len; ++t) {
      const uint8_t y = batch.tags[batch.at(b, t)];
      if (y >= kBilstmClasses) throw std::invalid_argument("bilstm: tag out of range");
      loss -= std::log(std::max(s.probs(y, static_cast<Index>(t)), 1e-300));
      dZ(y, static_cast<Index>(t)) -= 1.0;
    }
    if (!grad) continue;
    dZ *= norm;
    grad->output.noalias() += dZ * s.hidden.transpose();
    grad->output_bias += dZ.rowwise().sum();
    const MatrixXd dHidden = p.output.transpose() * dZ;
    const Index H = s.fwd.hidden.rows();
    MatrixXd dX = backprop_lstm(p.forward, s.projected, s.fwd, dHidden.topRows(H), false,
                                grad->forward);
    dX += backprop_lstm(p.backward, s.projected, s.bwd, dHidden.bottomRows(H), true,
                        grad->backward);
    if (p.projection.size()) {
      grad->projection.noalias() += dX * s.inputs.transpose();
      dX = p.projection.transpose() * dX;
    }
    for (size_t t = 0; t < len; ++t) {
      const int64_t id = batch.tokens[batch.at(b, t)];
      if (id < V) grad->embedding.col(id) += dX.col(static_cast<Index>(t));
    }
  }
  return loss * norm;
}

BilstmModel train_bilstm(const AnnotatedDataset& train, const EmbeddingSet& embeddings,
                         const BilstmConfig& config, BilstmTrainReport* report) {
  if (train.empty()) throw std::invalid_argument("train_bilstm: empty training set");
  if (config.max_seq_len == 0 || config.phase1_batch == 0 || config.phase2_batch == 0) {
    throw std::invalid_argument("train_bilstm: sequence length and batch sizes must be >= 1");
  }

  std::map<std::string, bool> vocab_set;
  for (const auto& s : train.sentences()) {
    for (const auto& t : s) vocab_set.emplace(t.word, true);
  }
  std::vector<std::string> vocab;
  for (const auto& [w, _] : vocab_set) vocab.push_back(w);
  BilstmModel model(config, embeddings, vocab);

  std::vector<std::vector<int64_t>> seq_tokens;
  std::vector<std::vector<uint8_t>> seq_tags;
  size_t truncated = 0;
  for (const auto& s : train.sentences()) {
    const size_t len = std::min(s.size(), config.max_seq_len);
    if (len < s.size()) ++truncated;
    std::vector<int64_t> ids;
    std::vector<uint8_t> tags;
    for (size_t t = 0; t < len; ++t) {
      ids.push_back(model.word_id(s[t].word));
      tags.push_back(static_cast<uint8_t>(tag_index(s[t].tag)));
    }
    seq_tokens.push_back(std::move(ids));
    seq_tags.push_back(std::move(tags));
  }
  if (report) report->truncated_sentences = truncated;

  auto batch_of = [&](const std::vector<size_t>& order, size_t start, size_t end) {
    std::vector<std::vector<int64_t>> toks;
    std::vector<std::vector<uint8_t>> tags;
    size_t steps = 0;
    for (size_t k = start; k < end; ++k) {
      toks.push_back(seq_tokens[order[k]]);
      tags.push_back(seq_tags[order[k]]);
      steps = std::max(steps, toks.back().size());
    }
    return make_batch(toks, tags, steps);
  };

  const size_t n = seq_tokens.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});

  if (report) {
    double total = 0;
    size_t count = 0;
    for (size_t start = 0; start < n; start += config.phase1_batch) {
      const PaddedBatch batch = batch_of(order, start, std::min(n, start + config.phase1_batch));
      size_t toks = 0;
      for (size_t b = 0; b < batch.batch; ++b) toks += batch.length(b);
      total += bilstm_loss(model, batch) * static_cast<double>(toks);
      count += toks;
    }
    report->initial_loss = count ? total / static_cast<double>(count) : 0.0;
    report->epoch_loss.clear();
  }

  BilstmParams m = model.params().zeros_like();
  BilstmParams v = model.params().zeros_like();
  BilstmParams grad;
  auto params_t = tensors(model.params());
  auto m_t = tensors(m);
  auto v_t = tensors(v);
  // Index 0 is the embedding table.
  const size_t first_tensor = config.trainable_embeddings ? 0 : 1;

  Rng rng(config.seed);
  rng = rng.fork(7);
  size_t step = 0;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const size_t batch_size = epoch < config.epochs / 2 ? config.phase1_batch : config.phase2_batch;
    rng.shuffle(order);
    double epoch_loss = 0;
    size_t epoch_tokens = 0;
    for (size_t start = 0; start < n; start += batch_size) {
      const PaddedBatch batch = batch_of(order, start, std::min(n, start + batch_size));
      size_t toks = 0;
      for (size_t b = 0; b < batch.batch; ++b) toks += batch.length(b);
      const double loss = bilstm_loss(model, batch, &grad);
      epoch_loss += loss * static_cast<double>(toks);
      epoch_tokens += toks;

      auto grad_t = tensors(grad);
      double sq = 0;
      for (size_t k = first_tensor; k < grad_t.size(); ++k) {
        for (size_t i = 0; i < grad_t[k].second; ++i) sq += grad_t[k].first[i] * grad_t[k].first[i];
      }
      const double gnorm = std::sqrt(sq);
      const double clip = gnorm > config.clip_norm ? config.clip_norm / gnorm : 1.0;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      const double lr = config.learning_rate * std::sqrt(c2) / c1;
      for (size_t k = first_tensor; k < params_t.size(); ++k) {
        double* w = params_t[k].first;
        double* mk = m_t[k].first;
        double* vk = v_t[k].first;
        const double* g = grad_t[k].first;
        for (size_t i = 0; i < params_t[k].second; ++i) {
          const double gi = g[i] * clip;
          mk[i] = config.beta1 * mk[i] + (1 - config.beta1) * gi;
          vk[i] = config.beta2 * vk[i] + (1 - config.beta2) * gi * gi;
          w[i] -= lr * mk[i] / (std::sqrt(vk[i]) + config.epsilon);
        }
      }
    }
    if (report) {
      report->epoch_loss.push_back(epoch_tokens ? epoch_loss / static_cast<double>(epoch_tokens)
                                                : 0.0);
    }
  }
  return model;
}

PaddedBatch BilstmTagger::encode(const std::vector<std::vector<std::string>>& sentences) const {
  std::vector<std::vector<int64_t>> toks;
  std::vector<std::vector<uint8_t>> tags;
  std::vector<VectorXd> extra;
  const auto V = static_cast<int64_t>(model_.vocabulary().size());
  size_t steps = 0;
  for (const auto& s : sentences) {
    std::vector<int64_t> ids;
    for (const auto& w : s) {
      int64_t id = model_.word_id(w);
      if (id < 0) {
        const auto mv = merge_vector(embeddings_, w);
        extra.push_back(Eigen::Map<const Eigen::VectorXf>(mv.values.data(),
                                                          static_cast<Index>(mv.values.size()))
                            .cast<double>());
        id = V + static_cast<int64_t>(extra.size()) - 1;
      }
      ids.push_back(id);
    }
    steps = std::max(steps, ids.size());
    tags.emplace_back(ids.size(), uint8_t{0});
    toks.push_back(std::move(ids));
  }
  PaddedBatch batch = make_batch(toks, tags, steps);
  batch.extra = std::move(extra);
  return batch;
}

std::vector<Distribution> BilstmTagger::predict(const std::vector<std::string>& sentence) const {
  const PaddedBatch batch = encode({sentence});
  const auto steps = bilstm_forward(model_, batch);
  std::vector<Distribution> out;
  for (size_t t = 0; t < sentence.size(); ++t) {
    const auto& d = steps[batch.at(0, t)];
    double sum = 0;
    for (size_t c = 0; c < kNumTags; ++c) sum += d[c];
    Distribution p;
    for (size_t c = 0; c < kNumTags; ++c) p[c] = sum > 0 ? d[c] / sum : 1.0 / kNumTags;
    out.push_back(p);
  }
  return out;
}

std::vector<std::pair<std::string, LanguageTag>> tag_sentence(const BilstmTagger& tagger,
                                                              const Sentence& sentence) {
  if (sentence.tokens.empty()) throw std::invalid_argument("tag_sentence: empty sentence");
  const auto dists = tagger.predict(sentence.tokens);
  std::vector<std::pair<std::string, LanguageTag>> out;
  for (size_t t = 0; t < dists.size(); ++t) out.emplace_back(sentence.tokens[t], argmax(dists[t]));
  return out;
}

std::string serialize_bilstm(const BilstmTagger& tagger) {
  const BilstmModel& model = tagger.model();
  const BilstmConfig& c = model.config();
  BinaryWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  for (size_t v : {c.max_seq_len, c.projection_dim, c.hidden, c.epochs, c.phase1_batch,
                   c.phase2_batch}) {
    w.u64(v);
  }
  for (double v : {c.learning_rate, c.beta1, c.beta2, c.epsilon, c.clip_norm}) w.f64(v);
  w.u8(c.trainable_embeddings ? 1 : 0);
  w.u64(c.seed);
  w.u32(static_cast<uint32_t>(kBilstmClasses));
  w.u32(static_cast<uint32_t>(model.vocabulary().size()));
  for (const auto& word : model.vocabulary()) w.str(word);
  model.params().for_each([&](const auto& m) { write_tensor(w, m); });
  w.str(serialize_embeddings(tagger.embeddings()));
  return w.bytes();
}

BilstmTagger deserialize_bilstm(std::string_view bytes) {
  BinaryReader r(bytes);
  r.expect_magic(kMagic);
  const uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("bilstm: unsupported version " + std::to_string(version));
  BilstmConfig c;
  for (size_t* v : {&c.max_seq_len, &c.projection_dim, &c.hidden, &c.epochs, &c.phase1_batch,
                    &c.phase2_batch}) {
    *v = r.u64();
  }
  for (double* v : {&c.learning_rate, &c.beta1, &c.beta2, &c.epsilon, &c.clip_norm}) *v = r.f64();
  c.trainable_embeddings = r.u8() != 0;
  c.seed = r.u64();
  if (r.u32() != kBilstmClasses) throw FormatError("bilstm: class count mismatch");
  std::vector<std::string> vocab(r.u32());
  for (auto& word : vocab) word = r.str();

  BilstmParams p;
  p.for_each([&](auto& m) {
    const uint32_t rows = r.u32();
    const uint32_t cols = r.u32();
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, VectorXd>) {
      if (cols != 1) throw FormatError("bilstm: expected a vector tensor");
      m.resize(rows);
    } else {
      m.resize(rows, cols);
    }
    r.f64s({m.data(), static_cast<size_t>(m.size())});
  });
  EmbeddingSet embeddings = deserialize_embeddings(r.str());
  r.expect_end();
  try {
    BilstmModel model(c, std::move(vocab), std::move(p));
    if (model.merged_dim() != embeddings.layout.total_dim()) {
      throw FormatError("bilstm: embedding width does not match the embedding set");
    }
    return BilstmTagger(std::move(model), std::move(embeddings));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

void save_bilstm(const BilstmTagger& tagger, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_bilstm(tagger));
}

BilstmTagger load_bilstm(const std::filesystem::path& path) {
  return deserialize_bilstm(read_file(path));
}

}  // namespace coli
