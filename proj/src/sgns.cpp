#include "gailchat/sgns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gailchat/kernels.hpp"

namespace gailchat {

template <class T>
T sgns_triple_loss_grad(std::size_t dim, const T* v_center, const T* u_context,
                        const T* const* u_negatives, std::size_t n_neg, T* g_center,
                        T* g_context, T** g_negatives) {
  auto sigma = [](T x) { return T(1) / (T(1) + std::exp(-x)); };

  std::fill(g_center, g_center + dim, T(0));
  T loss = 0;

  // positive: label 1, d/dz -log s(z) = s(z) - 1
  {
    const T z = kern::dot(v_center, u_context, dim);
    const T s = sigma(z);
    loss -= std::log(std::max(s, std::numeric_limits<T>::min()));
    const T g = s - T(1);
    kern::scale(v_center, g, g_context, dim);
    kern::axpy(g, u_context, g_center, dim);
  }
  // negatives: label 0, d/dz -log s(-z) = s(z)
  for (std::size_t k = 0; k < n_neg; ++k) {
    const T z = kern::dot(v_center, u_negatives[k], dim);
    const T s = sigma(-z);
    loss -= std::log(std::max(s, std::numeric_limits<T>::min()));
    const T g = sigma(z);
    kern::scale(v_center, g, g_negatives[k], dim);
    kern::axpy(g, u_negatives[k], g_center, dim);
  }
  return loss;
}

template float sgns_triple_loss_grad(std::size_t, const float*, const float*, const float* const*,
                                     std::size_t, float*, float*, float**);
template double sgns_triple_loss_grad(std::size_t, const double*, const double*,
                                      const double* const*, std::size_t, double*, double*,
                                      double**);

namespace {

// cumulative unigram^0.75 weights for negative sampling; specials with zero
// count have zero weight and are never drawn
struct NegativeTable {
  std::vector<double> cdf;
  double total = 0.0;

  explicit NegativeTable(const Vocabulary& vocab) {
    cdf.resize(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const auto c = vocab.count(vocab.token(static_cast<int>(i)));
      total += c > 0 ? std::pow(static_cast<double>(c), 0.75) : 0.0;
      cdf[i] = total;
    }
    if (total <= 0.0) throw std::invalid_argument("finetune_skipgram: vocabulary has no counts");
  }

  int sample(Rng& rng) const {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1));
  }
};

}  // namespace

std::size_t finetune_skipgram(const std::vector<std::vector<std::string>>& streams,
                              EmbeddingMatrix& emb, const Vocabulary& vocab,
                              const SgnsConfig& cfg, Rng& rng) {
  if (cfg.window < 1 || cfg.negatives < 1 || cfg.lr <= 0)
    throw std::invalid_argument("finetune_skipgram: bad config");
  if (cfg.epochs == 0) return 0;

  const std::size_t dim = static_cast<std::size_t>(emb.dim());
  NegativeTable table(vocab);

  // encode streams once; drop OOV tokens
  std::vector<std::vector<int>> sentences;
  std::size_t total_words = 0;
  for (const auto& s : streams) {
    std::vector<int> ids;
    for (const auto& tok : s) {
      const int id = vocab.id(tok);
      if (id >= 0 && id != vocab.pad_id()) ids.push_back(id);
    }
    total_words += ids.size();
    if (ids.size() >= 2) sentences.push_back(std::move(ids));
  }
  if (sentences.empty()) return 0;

  // context matrix, zero-init as in word2vec
  std::vector<float> syn1(vocab.size() * dim, 0.0f);

  const double total_steps = static_cast<double>(cfg.epochs) * static_cast<double>(total_words);
  const double min_lr = cfg.lr * 1e-4;
  std::vector<float> g_center(dim), g_out(dim), neu1e(dim);

  std::size_t trained_pairs = 0;
  std::size_t words_done = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sent : sentences) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos, ++words_done) {
        const int center = sent[pos];
        const bool center_locked =
            !cfg.all_trainable && center < static_cast<int>(emb.loaded_from_file.size()) &&
            emb.loaded_from_file[center];
        const double progress = static_cast<double>(words_done) / total_steps;
        const float lr = static_cast<float>(std::max(cfg.lr * (1.0 - progress), min_lr));

        const std::size_t lo = pos >= static_cast<std::size_t>(cfg.window) ? pos - cfg.window : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + cfg.window);
        for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
          if (cpos == pos) continue;
          const int context = sent[cpos];
          float* v = emb.row(center);
          std::fill(neu1e.begin(), neu1e.end(), 0.0f);

          // positive
          {
            float* u = syn1.data() + static_cast<std::size_t>(context) * dim;
            const float z = kern::dot(v, u, dim);
            const float g = (1.0f / (1.0f + std::exp(-z))) - 1.0f;
            kern::axpy(g, u, neu1e.data(), dim);
            kern::axpy(-lr * g, v, u, dim);
          }
          // negatives, resampled when they hit the positive context
          for (int k = 0; k < cfg.negatives; ++k) {
            int neg = table.sample(rng);
            for (int tries = 0; neg == context && tries < 8; ++tries) neg = table.sample(rng);
            if (neg == context) continue;
            float* u = syn1.data() + static_cast<std::size_t>(neg) * dim;
            const float z = kern::dot(v, u, dim);
            const float g = 1.0f / (1.0f + std::exp(-z));
            kern::axpy(g, u, neu1e.data(), dim);
            kern::axpy(-lr * g, v, u, dim);
          }
          if (!center_locked) kern::axpy(-lr, neu1e.data(), v, dim);
          ++trained_pairs;
        }
      }
    }
  }

  emb.l2_normalize_rows(vocab.pad_id());
  return trained_pairs;
}

}  // namespace gailchat
