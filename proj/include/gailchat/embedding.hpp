#pragma once

// The l2-normalized word embedding table mapping vocabulary tokens to
// 300-dim vectors, with word2vec text-format IO and similarity queries.
// Row 0 (<pad>) is pinned to zero and excluded from training.

#include <cstdint>
#include <string>
#include <vector>

#include "gailchat/rng.hpp"
#include "gailchat/vocab.hpp"

namespace gailchat {

class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t vocab_size, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_; }

  float* row(int id) { return data_.data() + static_cast<std::size_t>(id) * dim_; }
  const float* row(int id) const { return data_.data() + static_cast<std::size_t>(id) * dim_; }
  const std::vector<float>& values() const { return data_; }
  std::vector<float>& values() { return data_; }

  // which rows came from a pretrained vectors file (vs random init)
  std::vector<std::uint8_t> loaded_from_file;

  void l2_normalize_rows(int skip_row = 0);

 private:
  std::size_t rows_ = 0;
  int dim_ = 0;
  std::vector<float> data_;
};

// Random unit-norm vector; deterministic under a fixed seed.
std::vector<float> init_special(int dim, Rng& rng);

// Rows for vocabulary tokens found in the file are loaded (then normalized);
// everything else gets a random unit row; <pad> stays zero. Throws on header
// or row arity mismatch, or when the file dim differs from `dim`.
EmbeddingMatrix load_word2vec_text(const std::string& path, const Vocabulary& vocab, int dim,
                                   Rng& rng);

// All-random unit rows (no pretrained file).
EmbeddingMatrix random_embedding(const Vocabulary& vocab, int dim, Rng& rng);

// word2vec text format: "V D" header then one "token v1 .. vD" row per id,
// 6-decimal fixed point.
void save_word2vec_text(const std::string& path, const EmbeddingMatrix& emb,
                        const Vocabulary& vocab);

double cosine_sim(const float* a, const float* b, int dim);  // throws on zero norm

// k most similar tokens to `token`, excluding the query and <pad>; sorted by
// descending similarity, ties by token order. Throws on unknown token.
std::vector<std::pair<std::string, double>> nearest(const EmbeddingMatrix& emb,
                                                    const Vocabulary& vocab,
                                                    const std::string& token, int k);

}  // namespace gailchat
