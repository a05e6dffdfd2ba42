#include "coli/skipgram.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "coli/random.h"

namespace coli {

SkipgramTable::SkipgramTable(std::vector<std::string> tokens, size_t dim, std::vector<float> vectors)
    : tokens_(std::move(tokens)), dim_(dim), vectors_(std::move(vectors)) {
  if (dim_ == 0) throw std::invalid_argument("skipgram dim must be >= 1");
  if (vectors_.size() != tokens_.size() * dim_) {
    throw std::invalid_argument("skipgram table: vector data does not match vocab x dim");
  }
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<uint32_t>(i)).second) {
      throw std::invalid_argument("skipgram table: duplicate token '" + tokens_[i] + "'");
    }
  }
}

const float* SkipgramTable::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : vectors_.data() + it->second * dim_;
}

SkipgramTable train_skipgram(const std::vector<std::vector<std::string>>& sequences, size_t dim,
                             const SkipgramOptions& opts, SkipgramReport* report) {
  if (dim == 0) throw std::invalid_argument("skipgram dim must be >= 1");
  if (opts.window == 0) throw std::invalid_argument("skipgram window must be >= 1");

  std::map<std::string, uint64_t> counts;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) ++counts[t];
  }
  if (counts.empty()) throw std::invalid_argument("skipgram: empty corpus");

  // Frequency-descending ids, ties by token.
  std::vector<std::pair<std::string, uint64_t>> vocab;
  for (const auto& [tok, c] : counts) {
    if (c >= opts.min_count) vocab.emplace_back(tok, c);
  }
  if (vocab.empty()) throw std::invalid_argument("skipgram: empty vocabulary after min_count");
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::map<std::string, uint32_t> ids;
  std::vector<std::string> tokens;
  for (const auto& [tok, c] : vocab) {
    ids.emplace(tok, static_cast<uint32_t>(tokens.size()));
    tokens.push_back(tok);
  }
  const size_t V = tokens.size();

  std::vector<std::vector<uint32_t>> encoded;
  size_t total_tokens = 0;
  for (const auto& seq : sequences) {
    std::vector<uint32_t> ids_seq;
    for (const auto& t : seq) {
      auto it = ids.find(t);
      if (it != ids.end()) ids_seq.push_back(it->second);
    }
    total_tokens += ids_seq.size();
    encoded.push_back(std::move(ids_seq));
  }

  std::vector<double> noise_cdf(V);
  double acc = 0;
  for (size_t i = 0; i < V; ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    noise_cdf[i] = acc;
  }
  for (double& c : noise_cdf) c /= acc;

  Rng rng(opts.seed);
  std::vector<float> in(V * dim);
  std::vector<float> out(V * dim, 0.0f);
  for (float& x : in) x = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));

  auto sample_noise = [&]() -> uint32_t {
    const double u = rng.uniform();
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    return static_cast<uint32_t>(std::min<size_t>(it - noise_cdf.begin(), V - 1));
  };

  std::vector<float> d_center(dim), d_context(dim);
  std::vector<std::vector<float>> d_neg(opts.negative_samples, std::vector<float>(dim));
  std::vector<float*> d_neg_ptrs;
  std::vector<const float*> neg_ptrs;
  std::vector<uint32_t> neg_ids;

  const double total_steps = static_cast<double>(opts.epochs) * static_cast<double>(total_tokens);
  double processed = 0;
  if (report) report->epoch_loss.clear();

  for (size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    double epoch_loss = 0;
    size_t pairs = 0;
    for (const auto& seq : encoded) {
      for (size_t i = 0; i < seq.size(); ++i, processed += 1) {
        const double progress = total_steps > 0 ? processed / total_steps : 0.0;
        const float lr =
            static_cast<float>(opts.learning_rate * std::max(1e-4, 1.0 - progress));
        const size_t reduced = opts.window - rng.below(opts.window);
        const size_t lo = i >= reduced ? i - reduced : 0;
        const size_t hi = std::min(seq.size() - 1, i + reduced);
        const uint32_t center = seq[i];
        float* v = in.data() + center * dim;
        for (size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const uint32_t ctx = seq[j];
          neg_ids.clear();
          for (size_t k = 0; k < opts.negative_samples; ++k) {
            const uint32_t n = sample_noise();
            if (n != ctx) neg_ids.push_back(n);
          }
          neg_ptrs.clear();
          d_neg_ptrs.clear();
          for (size_t k = 0; k < neg_ids.size(); ++k) {
            neg_ptrs.push_back(out.data() + neg_ids[k] * dim);
            d_neg_ptrs.push_back(d_neg[k].data());
          }
          float* u = out.data() + ctx * dim;
          const float loss = negative_sampling_loss<float>(
              std::span<const float>(v, dim), std::span<const float>(u, dim), neg_ptrs, d_center,
              d_context, d_neg_ptrs);
          epoch_loss += loss;
          ++pairs;
          for (size_t d = 0; d < dim; ++d) u[d] -= lr * d_context[d];
          for (size_t k = 0; k < neg_ids.size(); ++k) {
            float* un = out.data() + neg_ids[k] * dim;
            for (size_t d = 0; d < dim; ++d) un[d] -= lr * d_neg[k][d];
          }
          for (size_t d = 0; d < dim; ++d) v[d] -= lr * d_center[d];
        }
      }
    }
    if (report) {
      report->epoch_loss.push_back(pairs ? epoch_loss / static_cast<double>(pairs) : 0.0);
      report->pairs_per_epoch = pairs;
    }
  }

  for (float x : in) {
    if (!std::isfinite(x)) throw std::runtime_error("skipgram: training diverged");
  }
  return SkipgramTable(std::move(tokens), dim, std::move(in));
}

}  // namespace coli
