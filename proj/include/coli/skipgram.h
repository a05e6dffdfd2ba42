#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace coli {

struct SkipgramOptions {
  size_t window = 5;
  size_t negative_samples = 5;
  size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of the start value
  size_t min_count = 1;
  uint64_t seed = 1;
};

class SkipgramTable {
 public:
  SkipgramTable() = default;
  SkipgramTable(std::vector<std::string> tokens, size_t dim, std::vector<float> vectors);

  size_t dim() const { return dim_; }
  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<float>& data() const { return vectors_; }

  // nullptr when the token is out of vocabulary.
  const float* find(const std::string& token) const;
  std::span<const float> row(size_t index) const { return {vectors_.data() + index * dim_, dim_}; }

  bool operator==(const SkipgramTable& o) const {
    return dim_ == o.dim_ && tokens_ == o.tokens_ && vectors_ == o.vectors_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, uint32_t> index_;
  size_t dim_ = 0;
  std::vector<float> vectors_;  // row-major, size() x dim()
};

struct SkipgramReport {
  std::vector<double> epoch_loss;  // mean loss per (center, context) pair
  size_t pairs_per_epoch = 0;
};

// Skipgram with negative sampling; single-threaded and deterministic for
// a fixed seed. Negatives are drawn from the unigram distribution raised
// to the 0.75 power.
SkipgramTable train_skipgram(const std::vector<std::vector<std::string>>& sequences, size_t dim,
                             const SkipgramOptions& opts, SkipgramReport* report = nullptr);

namespace detail {

template <typename T>
T log_sigmoid(T x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace detail

// Loss of one (center, context, negatives) triple,
//   -log s(u_ctx . v) - sum_k log s(-u_k . v),
// with gradients written to the d_* buffers (overwritten, not accumulated).
// The trainer uses this routine for every update.
template <typename T>
T negative_sampling_loss(std::span<const T> center, std::span<const T> context,
                         std::span<const T* const> negatives, std::span<T> d_center,
                         std::span<T> d_context, std::span<T* const> d_negatives) {
  const size_t dim = center.size();
  auto dot = [dim](const T* a, const T* b) {
    T s = 0;
    for (size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
  };
  for (auto& g : d_center) g = 0;

  const T pos = dot(context.data(), center.data());
  T loss = -detail::log_sigmoid(pos);
  const T g_pos = detail::sigmoid(pos) - T(1);
  for (size_t i = 0; i < dim; ++i) {
    d_context[i] = g_pos * center[i];
    d_center[i] += g_pos * context[i];
  }
  for (size_t k = 0; k < negatives.size(); ++k) {
    const T neg = dot(negatives[k], center.data());
    loss -= detail::log_sigmoid(-neg);
    const T g_neg = detail::sigmoid(neg);
    for (size_t i = 0; i < dim; ++i) {
      d_negatives[k][i] = g_neg * center[i];
      d_center[i] += g_neg * negatives[k][i];
    }
  }
  return loss;
}

}  // namespace coli
