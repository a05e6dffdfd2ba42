#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "coli/classifier.h"

namespace coli {

enum class LossKind : uint8_t { hinge = 0, logistic = 1 };

struct LinearOptions {
  // Hinge L2 weight. Logistic uses 1 / (logistic_c * N) instead.
  double lambda = 1e-4;
  double logistic_c = 1.0;
  size_t epochs = 100;
  double learning_rate = 0.1;  // scaled by 1 / (1 + epoch)
  double tolerance = 1e-4;     // logistic: stop when the objective stalls
  bool class_weights = false;
  uint64_t seed = 1;
};

class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(LossKind kind, Eigen::MatrixXd weights, Eigen::VectorXd bias);

  LossKind kind() const { return kind_; }
  size_t input_dim() const { return static_cast<size_t>(weights_.cols()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  Eigen::MatrixXd& weights() { return weights_; }
  Eigen::VectorXd& bias() { return bias_; }

  std::array<double, kNumTags> margins(const SparseRow& x) const;
  // Softmax over the raw scores; for hinge these are the one-vs-rest margins.
  Distribution predict_proba(const SparseRow& x) const;

  bool operator==(const LinearModel& o) const {
    return kind_ == o.kind_ && weights_ == o.weights_ && bias_ == o.bias_;
  }

 private:
  LossKind kind_ = LossKind::logistic;
  Eigen::MatrixXd weights_;  // classes x features
  Eigen::VectorXd bias_;
};

LinearModel train_linear(const LabeledRows& data, LossKind kind, const LinearOptions& opts,
                         TrainReport* report = nullptr);

struct LinearGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

// Mean multinomial cross-entropy plus (lambda / 2) * ||W||^2.
double logistic_objective(const LinearModel& model, const LabeledRows& data, double lambda,
                          LinearGradient* grad = nullptr);

}  // namespace coli
