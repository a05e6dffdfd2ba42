#include "coli/linear_model.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "coli/random.h"

namespace coli {

LinearModel::LinearModel(LossKind kind, Eigen::MatrixXd weights, Eigen::VectorXd bias)
    : kind_(kind), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() != static_cast<Eigen::Index>(kNumTags) || bias_.size() != weights_.rows()) {
    throw std::invalid_argument("linear model: expected 6 classes");
  }
  if (!weights_.allFinite() || !bias_.allFinite()) {
    throw std::invalid_argument("linear model: non-finite parameters");
  }
}

std::array<double, kNumTags> LinearModel::margins(const SparseRow& x) const {
  std::array<double, kNumTags> s;
  for (size_t c = 0; c < kNumTags; ++c) s[c] = bias_[static_cast<Eigen::Index>(c)];
  for (size_t k = 0; k < x.index.size(); ++k) {
    if (x.index[k] >= input_dim()) {
      throw std::invalid_argument("linear model: input dimension mismatch");
    }
    const double* col = weights_.data() + static_cast<size_t>(x.index[k]) * kNumTags;
    for (size_t c = 0; c < kNumTags; ++c) s[c] += col[c] * x.value[k];
  }
  return s;
}

Distribution LinearModel::predict_proba(const SparseRow& x) const { return softmax(margins(x)); }

double logistic_objective(const LinearModel& model, const LabeledRows& data, double lambda,
                          LinearGradient* grad) {
  const auto n = static_cast<double>(data.rows.size());
  if (grad) {
    grad->weights = lambda * model.weights();
    grad->bias = Eigen::VectorXd::Zero(kNumTags);
  }
  double loss = 0;
  for (size_t i = 0; i < data.rows.size(); ++i) {
    const auto scores = model.margins(data.rows[i]);
    const Distribution p = softmax(scores);
    const size_t y = tag_index(data.labels[i]);
    const double mx = *std::max_element(scores.begin(), scores.end());
    double lse = 0;
    for (double s : scores) lse += std::exp(s - mx);
    loss += mx + std::log(lse) - scores[y];
    if (!grad) continue;
    const SparseRow& x = data.rows[i];
    for (size_t c = 0; c < kNumTags; ++c) {
      const double g = (p[c] - (c == y ? 1.0 : 0.0)) / n;
      grad->bias[static_cast<Eigen::Index>(c)] += g;
      for (size_t k = 0; k < x.index.size(); ++k) {
        grad->weights(static_cast<Eigen::Index>(c), x.index[k]) += g * x.value[k];
      }
    }
  }
  return loss / n + 0.5 * lambda * model.weights().squaredNorm();
}

namespace {

double hinge_objective(const LinearModel& model, const LabeledRows& data, double lambda) {
  double loss = 0;
  for (size_t i = 0; i < data.rows.size(); ++i) {
    const auto m = model.margins(data.rows[i]);
    for (size_t c = 0; c < kNumTags; ++c) {
      const double t = c == tag_index(data.labels[i]) ? 1.0 : -1.0;
      loss += std::max(0.0, 1.0 - t * m[c]);
    }
  }
  return loss / static_cast<double>(data.rows.size()) +
         0.5 * lambda * model.weights().squaredNorm();
}

}  // namespace

LinearModel train_linear(const LabeledRows& data, LossKind kind, const LinearOptions& opts,
                         TrainReport* report) {
  validate_rows(data);
  warn_missing_classes(data.labels, report);
  const size_t n = data.rows.size();
  const auto D = static_cast<Eigen::Index>(data.dim);
  const double lambda =
      kind == LossKind::hinge ? opts.lambda : 1.0 / (opts.logistic_c * static_cast<double>(n));

  std::array<double, kNumTags> cw;
  cw.fill(1.0);
  if (opts.class_weights) cw = inverse_frequency_weights(data.labels);

  // W = scale * V keeps the L2 shrink O(1) per step.
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(kNumTags, D);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(kNumTags);
  double scale = 1.0;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(opts.seed);
  double prev_objective = std::numeric_limits<double>::infinity();
  if (report) report->epochs_run = 0;

  for (size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    const double eta = opts.learning_rate / (1.0 + static_cast<double>(epoch));
    for (size_t i : order) {
      const SparseRow& x = data.rows[i];
      const size_t y = tag_index(data.labels[i]);
      std::array<double, kNumTags> s;
      for (size_t c = 0; c < kNumTags; ++c) s[c] = b[static_cast<Eigen::Index>(c)];
      for (size_t k = 0; k < x.index.size(); ++k) {
        const double* col = V.data() + static_cast<size_t>(x.index[k]) * kNumTags;
        for (size_t c = 0; c < kNumTags; ++c) s[c] += scale * col[c] * x.value[k];
      }

      std::array<double, kNumTags> g{};
      if (kind == LossKind::logistic) {
        const Distribution p = softmax(s);
        for (size_t c = 0; c < kNumTags; ++c) g[c] = cw[y] * (p[c] - (c == y ? 1.0 : 0.0));
      } else {
        for (size_t c = 0; c < kNumTags; ++c) {
          const double t = c == y ? 1.0 : -1.0;
          if (t * s[c] < 1.0) g[c] = -cw[y] * t;
        }
      }

      scale *= 1.0 - eta * lambda;
      for (size_t k = 0; k < x.index.size(); ++k) {
        double* col = V.data() + static_cast<size_t>(x.index[k]) * kNumTags;
        for (size_t c = 0; c < kNumTags; ++c) col[c] -= eta * g[c] * x.value[k] / scale;
      }
      for (size_t c = 0; c < kNumTags; ++c) b[static_cast<Eigen::Index>(c)] -= eta * g[c];
      if (scale < 1e-9) {
        V *= scale;
        scale = 1.0;
      }
    }

    const LinearModel snapshot(kind, scale * V, b);
    const double objective = kind == LossKind::logistic
                                 ? logistic_objective(snapshot, data, lambda)
                                 : hinge_objective(snapshot, data, lambda);
    if (report) {
      report->epoch_loss.push_back(objective);
      report->epochs_run = epoch + 1;
    }
    if (kind == LossKind::logistic &&
        std::abs(prev_objective - objective) < opts.tolerance * std::max(1.0, std::abs(objective))) {
      break;
    }
    prev_objective = objective;
  }
  return LinearModel(kind, scale * V, b);
}

}  // namespace coli
