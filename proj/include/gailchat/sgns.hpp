#pragma once

// Skip-gram with negative sampling over the pair-file token streams,
// fine-tuning an EmbeddingMatrix in place. Fixed symmetric window, unigram^0.75
// negative distribution from vocabulary counts, learning rate decayed linearly
// to 1e-4 of its start. Rows are re-l2-normalized only after training ends.

#include <cstddef>
#include <vector>

#include "gailchat/embedding.hpp"
#include "gailchat/rng.hpp"
#include "gailchat/vocab.hpp"

namespace gailchat {

struct SgnsConfig {
  int window = 5;
  int negatives = 5;
  double lr = 0.025;
  int epochs = 5;
  bool all_trainable = true;  // false: rows loaded from a pretrained file stay locked
};

// Loss and gradients for one (center, positive context, negatives) triple:
//   L = -log s(u_ctx . v_c) - sum_k log s(-u_neg_k . v_c)
// Gradient buffers are overwritten. Shared by the trainer and the
// finite-difference tests (which instantiate double).
template <class T>
T sgns_triple_loss_grad(std::size_t dim, const T* v_center, const T* u_context,
                        const T* const* u_negatives, std::size_t n_neg, T* g_center,
                        T* g_context, T** g_negatives);

// Streams are token-string sentences (state and action sequences of the pair
// corpus). Returns the number of center/context pairs trained on.
std::size_t finetune_skipgram(const std::vector<std::vector<std::string>>& streams,
                              EmbeddingMatrix& emb, const Vocabulary& vocab,
                              const SgnsConfig& cfg, Rng& rng);

}  // namespace gailchat
