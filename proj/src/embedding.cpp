#include "gailchat/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gailchat/kernels.hpp"

namespace gailchat {

EmbeddingMatrix::EmbeddingMatrix(std::size_t vocab_size, int dim)
    : rows_(vocab_size), dim_(dim), data_(vocab_size * static_cast<std::size_t>(dim), 0.0f) {
  loaded_from_file.assign(vocab_size, 0);
}

void EmbeddingMatrix::l2_normalize_rows(int skip_row) {
  for (std::size_t r = 0; r < rows_; ++r) {
    if (static_cast<int>(r) == skip_row) continue;
    float* v = row(static_cast<int>(r));
    const float nrm = std::sqrt(kern::dot(v, v, static_cast<std::size_t>(dim_)));
    if (nrm > 0) kern::scale(v, 1.0f / nrm, v, static_cast<std::size_t>(dim_));
  }
}

std::vector<float> init_special(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("init_special: dim must be >= 1");
  std::vector<float> v(dim);
  double nrm2 = 0.0;
  do {
    nrm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      v[i] = static_cast<float>(rng.normal());
      nrm2 += static_cast<double>(v[i]) * v[i];
    }
  } while (nrm2 == 0.0);
  const float inv = static_cast<float>(1.0 / std::sqrt(nrm2));
  for (int i = 0; i < dim; ++i) v[i] *= inv;
  return v;
}

EmbeddingMatrix random_embedding(const Vocabulary& vocab, int dim, Rng& rng) {
  EmbeddingMatrix emb(vocab.size(), dim);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (static_cast<int>(r) == vocab.pad_id()) continue;
    auto v = init_special(dim, rng);
    std::copy(v.begin(), v.end(), emb.row(static_cast<int>(r)));
  }
  return emb;
}

EmbeddingMatrix load_word2vec_text(const std::string& path, const Vocabulary& vocab, int dim,
                                   Rng& rng) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read vectors file " + path);
  std::string header;
  if (!std::getline(f, header)) throw std::runtime_error("vectors file " + path + " is empty");
  std::istringstream hs(header);
  long long file_vocab = 0, file_dim = 0;
  if (!(hs >> file_vocab >> file_dim))
    throw std::runtime_error("vectors file " + path + ": malformed header: " + header);
  if (file_dim != dim)
    throw std::runtime_error("vectors file " + path + ": dimension " + std::to_string(file_dim) +
                             " does not match configured " + std::to_string(dim));

  EmbeddingMatrix emb(vocab.size(), dim);
  std::string line;
  long long rows_seen = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    ++rows_seen;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    const int id = vocab.id(token);
    float* dst = id >= 0 ? emb.row(id) : nullptr;
    int got = 0;
    float value = 0.0f;
    while (ls >> value) {
      if (dst && got < dim) dst[got] = value;
      ++got;
    }
    if (got != dim)
      throw std::runtime_error("vectors file " + path + ": row for '" + token + "' has " +
                               std::to_string(got) + " values, expected " + std::to_string(dim));
    if (id >= 0 && id != vocab.pad_id()) emb.loaded_from_file[id] = 1;
  }
  if (rows_seen != file_vocab)
    throw std::runtime_error("vectors file " + path + ": header announces " +
                             std::to_string(file_vocab) + " rows, found " +
                             std::to_string(rows_seen));

  for (std::size_t r = 0; r < vocab.size(); ++r) {
    const int id = static_cast<int>(r);
    if (id == vocab.pad_id() || emb.loaded_from_file[r]) continue;
    auto v = init_special(dim, rng);
    std::copy(v.begin(), v.end(), emb.row(id));
  }
  emb.l2_normalize_rows(vocab.pad_id());
  return emb;
}

void save_word2vec_text(const std::string& path, const EmbeddingMatrix& emb,
                        const Vocabulary& vocab) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write vectors file " + path);
  f << vocab.size() << " " << emb.dim() << "\n";
  char buf[32];
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    f << vocab.token(static_cast<int>(r));
    const float* v = emb.row(static_cast<int>(r));
    for (int i = 0; i < emb.dim(); ++i) {
      std::snprintf(buf, sizeof(buf), " %.6f", static_cast<double>(v[i]));
      f << buf;
    }
    f << "\n";
  }
}

double cosine_sim(const float* a, const float* b, int dim) {
  const double na = std::sqrt(static_cast<double>(kern::dot(a, a, static_cast<std::size_t>(dim))));
  const double nb = std::sqrt(static_cast<double>(kern::dot(b, b, static_cast<std::size_t>(dim))));
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_sim: zero-norm input");
  return static_cast<double>(kern::dot(a, b, static_cast<std::size_t>(dim))) / (na * nb);
}

std::vector<std::pair<std::string, double>> nearest(const EmbeddingMatrix& emb,
                                                    const Vocabulary& vocab,
                                                    const std::string& token, int k) {
  const int query = vocab.id(token);
  if (query < 0) throw std::invalid_argument("nearest: unknown token " + token);
  std::vector<std::pair<std::string, double>> sims;
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    const int id = static_cast<int>(r);
    if (id == query || id == vocab.pad_id()) continue;
    sims.emplace_back(vocab.token(id), cosine_sim(emb.row(query), emb.row(id), emb.dim()));
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (k < static_cast<int>(sims.size())) sims.resize(std::max(k, 0));
  return sims;
}

}  // namespace gailchat
