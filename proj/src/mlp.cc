#include "coli/mlp.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "coli/random.h"

namespace coli {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// First-layer pre-activations for sparse inputs, one column per row.
MatrixXd sparse_input_layer(const MatrixXd& W, const VectorXd& b, const LabeledRows& data,
                            std::span<const size_t> batch) {
  MatrixXd Z = b.replicate(1, static_cast<Index>(batch.size()));
  for (size_t k = 0; k < batch.size(); ++k) {
    const SparseRow& x = data.rows[batch[k]];
    for (size_t j = 0; j < x.index.size(); ++j) {
      Z.col(static_cast<Index>(k)) += W.col(x.index[j]) * x.value[j];
    }
  }
  return Z;
}

void softmax_columns(MatrixXd& Z) {
  for (Index c = 0; c < Z.cols(); ++c) {
    auto col = Z.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp();
    col /= col.sum();
  }
}

struct Adam {
  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
  size_t t = 0;

  explicit Adam(const MlpModel& m) {
    for (const auto& W : m.weights()) {
      mw.push_back(MatrixXd::Zero(W.rows(), W.cols()));
      vw.push_back(MatrixXd::Zero(W.rows(), W.cols()));
    }
    for (const auto& b : m.biases()) {
      mb.push_back(VectorXd::Zero(b.size()));
      vb.push_back(VectorXd::Zero(b.size()));
    }
  }

  void step(MlpModel& m, const MlpGradient& g, const MlpOptions& o) {
    ++t;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(t));
    const double lr = o.learning_rate * std::sqrt(c2) / c1;
    for (size_t l = 0; l < m.num_layers(); ++l) {
      mw[l] = o.beta1 * mw[l] + (1 - o.beta1) * g.weights[l];
      vw[l] = o.beta2 * vw[l] + (1 - o.beta2) * g.weights[l].cwiseAbs2();
      m.weights()[l].array() -= lr * mw[l].array() / (vw[l].array().sqrt() + o.epsilon);
      mb[l] = o.beta1 * mb[l] + (1 - o.beta1) * g.biases[l];
      vb[l] = o.beta2 * vb[l] + (1 - o.beta2) * g.biases[l].cwiseAbs2();
      m.biases()[l].array() -= lr * mb[l].array() / (vb[l].array().sqrt() + o.epsilon);
    }
  }
};

}  // namespace

MlpModel::MlpModel(std::vector<MatrixXd> weights, std::vector<VectorXd> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.empty() || weights_.size() != biases_.size()) {
    throw std::invalid_argument("mlp: layer count mismatch");
  }
  for (size_t l = 0; l < weights_.size(); ++l) {
    if (biases_[l].size() != weights_[l].rows() ||
        (l > 0 && weights_[l].cols() != weights_[l - 1].rows())) {
      throw std::invalid_argument("mlp: inconsistent layer shapes");
    }
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) {
      throw std::invalid_argument("mlp: non-finite parameters");
    }
  }
  if (weights_.back().rows() != static_cast<Index>(kNumTags)) {
    throw std::invalid_argument("mlp: output layer must have 6 classes");
  }
}

MlpModel MlpModel::initialize(size_t input_dim, const std::vector<size_t>& hidden, uint64_t seed) {
  std::vector<size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(kNumTags);
  Rng rng(seed);
  std::vector<MatrixXd> W;
  std::vector<VectorXd> b;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    MatrixXd w(dims[l + 1], dims[l]);
    for (Index j = 0; j < w.cols(); ++j) {
      for (Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-bound, bound);
    }
    VectorXd bias(dims[l + 1]);
    for (Index i = 0; i < bias.size(); ++i) bias[i] = rng.uniform(-bound, bound);
    W.push_back(std::move(w));
    b.push_back(std::move(bias));
  }
  return MlpModel(std::move(W), std::move(b));
}

std::vector<size_t> MlpModel::layer_dims() const {
  std::vector<size_t> dims{input_dim()};
  for (const auto& W : weights_) dims.push_back(static_cast<size_t>(W.rows()));
  return dims;
}

bool MlpModel::operator==(const MlpModel& o) const {
  if (weights_.size() != o.weights_.size()) return false;
  for (size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].rows() != o.weights_[l].rows() || weights_[l].cols() != o.weights_[l].cols() ||
        weights_[l] != o.weights_[l] || biases_[l] != o.biases_[l]) {
      return false;
    }
  }
  return true;
}

Distribution MlpModel::predict_proba(const SparseRow& x) const {
  for (uint32_t j : x.index) {
    if (j >= input_dim()) throw std::invalid_argument("mlp: input dimension mismatch");
  }
  VectorXd a = biases_[0];
  for (size_t j = 0; j < x.index.size(); ++j) a += weights_[0].col(x.index[j]) * x.value[j];
  for (size_t l = 1; l < weights_.size(); ++l) {
    a = a.cwiseMax(0.0);
    a = weights_[l] * a + biases_[l];
  }
  std::array<double, kNumTags> scores;
  for (size_t c = 0; c < kNumTags; ++c) scores[c] = a[static_cast<Index>(c)];
  return softmax(scores);
}

double mlp_objective(const MlpModel& model, const LabeledRows& data, std::span<const size_t> batch,
                     double alpha, MlpGradient* grad,
                     const std::array<double, kNumTags>* class_weights) {
  const size_t L = model.num_layers();
  const auto B = static_cast<double>(batch.size());
  const auto& W = model.weights();
  const auto& bias = model.biases();

  std::vector<MatrixXd> Z(L);  // pre-activations
  std::vector<MatrixXd> A(L);  // post-activations (A[L-1] = probabilities)
  Z[0] = sparse_input_layer(W[0], bias[0], data, batch);
  for (size_t l = 0; l < L; ++l) {
    if (l > 0) Z[l] = (W[l] * A[l - 1]).colwise() + bias[l];
    if (l + 1 < L) {
      A[l] = Z[l].cwiseMax(0.0);
    } else {
      A[l] = Z[l];
      softmax_columns(A[l]);
    }
  }

  const MatrixXd& P = A[L - 1];
  std::vector<double> sample_w(batch.size(), 1.0);
  double loss = 0;
  for (size_t k = 0; k < batch.size(); ++k) {
    const size_t y = tag_index(data.labels[batch[k]]);
    if (class_weights) sample_w[k] = (*class_weights)[y];
    // log-softmax straight from logits for accuracy near saturation
    const auto z = Z[L - 1].col(static_cast<Index>(k));
    const double mx = z.maxCoeff();
    const double lse = mx + std::log((z.array() - mx).exp().sum());
    loss += sample_w[k] * (lse - z[static_cast<Index>(y)]);
  }
  double reg = 0;
  for (const auto& w : W) reg += w.squaredNorm();
  const double objective = loss / B + alpha / (2.0 * B) * reg;
  if (!grad) return objective;

  grad->weights.assign(L, MatrixXd());
  grad->biases.assign(L, VectorXd());
  MatrixXd delta = P;
  for (size_t k = 0; k < batch.size(); ++k) {
    delta(static_cast<Index>(tag_index(data.labels[batch[k]])), static_cast<Index>(k)) -= 1.0;
    delta.col(static_cast<Index>(k)) *= sample_w[k] / B;
  }
  for (size_t l = L; l-- > 0;) {
    grad->biases[l] = delta.rowwise().sum();
    if (l > 0) {
      grad->weights[l] = delta * A[l - 1].transpose() + (alpha / B) * W[l];
      MatrixXd back = W[l].transpose() * delta;
      delta = back.cwiseProduct((Z[l - 1].array() > 0.0).cast<double>().matrix());
    } else {
      grad->weights[0] = (alpha / B) * W[0];
      for (size_t k = 0; k < batch.size(); ++k) {
        const SparseRow& x = data.rows[batch[k]];
        for (size_t j = 0; j < x.index.size(); ++j) {
          grad->weights[0].col(x.index[j]) += delta.col(static_cast<Index>(k)) * x.value[j];
        }
      }
    }
  }
  return objective;
}

MlpModel train_mlp(const LabeledRows& data, const MlpOptions& opts, TrainReport* report) {
  validate_rows(data);
  warn_missing_classes(data.labels, report);
  if (opts.batch_size == 0) throw std::invalid_argument("mlp: batch_size must be >= 1");

  Rng rng(opts.seed);
  MlpModel model = MlpModel::initialize(data.dim, opts.hidden, opts.seed);

  std::vector<size_t> order(data.rows.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<size_t> train_idx = order;
  std::vector<size_t> val_idx;
  const auto n_val = static_cast<size_t>(
      std::llround(opts.validation_fraction * static_cast<double>(data.rows.size())));
  if (data.rows.size() >= opts.min_validation_rows && n_val > 0) {
    Rng split_rng = rng.fork(1);
    split_rng.shuffle(order);
    val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  }

  std::array<double, kNumTags> cw;
  cw.fill(1.0);
  if (opts.class_weights) cw = inverse_frequency_weights(data.labels);

  Adam adam(model);
  MlpGradient grad;
  double best = std::numeric_limits<double>::infinity();
  MlpModel best_model = model;
  size_t stale = 0;
  if (report) report->epochs_run = 0;

  for (size_t epoch = 0; epoch < opts.max_epochs; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_loss = 0;
    for (size_t start = 0; start < train_idx.size(); start += opts.batch_size) {
      const size_t end = std::min(train_idx.size(), start + opts.batch_size);
      std::span<const size_t> batch(train_idx.data() + start, end - start);
      epoch_loss += mlp_objective(model, data, batch, opts.alpha, &grad, &cw) *
                    static_cast<double>(batch.size());
      adam.step(model, grad, opts);
    }
    epoch_loss /= static_cast<double>(train_idx.size());

    const double monitored =
        val_idx.empty() ? epoch_loss : mlp_objective(model, data, val_idx, 0.0, nullptr, &cw);
    if (report) {
      report->epoch_loss.push_back(epoch_loss);
      report->epochs_run = epoch + 1;
    }
    if (monitored < best - opts.tolerance) {
      best = monitored;
      stale = 0;
      if (!val_idx.empty()) best_model = model;
    } else if (++stale >= opts.patience) {
      break;
    }
  }
  return val_idx.empty() ? model : best_model;
}

}  // namespace coli
