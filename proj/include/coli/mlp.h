#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "coli/classifier.h"

namespace coli {

struct MlpOptions {
  std::vector<size_t> hidden = {150, 100, 50};
  size_t max_epochs = 300;
  size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double alpha = 1e-4;  // L2 penalty, scaled by 1 / batch size
  // Early stopping: stop after `patience` epochs without the validation
  // loss improving by more than `tolerance`. Datasets smaller than
  // min_validation_rows fall back to the training loss.
  size_t patience = 10;
  double tolerance = 1e-4;
  double validation_fraction = 0.1;
  size_t min_validation_rows = 20;
  bool class_weights = false;
  uint64_t seed = 1;
};

// ReLU hidden layers, softmax output over the six tags.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

  // Glorot-uniform initialisation for layers [input, hidden..., 6].
  static MlpModel initialize(size_t input_dim, const std::vector<size_t>& hidden, uint64_t seed);

  size_t input_dim() const { return static_cast<size_t>(weights_.front().cols()); }
  std::vector<size_t> layer_dims() const;
  size_t num_layers() const { return weights_.size(); }

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }

  Distribution predict_proba(const SparseRow& x) const;

  bool operator==(const MlpModel& o) const;

 private:
  std::vector<Eigen::MatrixXd> weights_;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases_;
};

struct MlpGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Mean (optionally class-weighted) cross-entropy over the selected rows
// plus alpha / (2 * batch) * sum ||W||^2.
double mlp_objective(const MlpModel& model, const LabeledRows& data,
                     std::span<const size_t> batch, double alpha, MlpGradient* grad = nullptr,
                     const std::array<double, kNumTags>* class_weights = nullptr);

MlpModel train_mlp(const LabeledRows& data, const MlpOptions& opts, TrainReport* report = nullptr);

}  // namespace coli
