#pragma once

// GRU cell and the stacked bidirectional encoder shared by the policy and
// the discriminator. Cell equations:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + r * (Un h) + bn)
//   h' = (1 - z) * n + z * h
// Padded positions are skipped with a masked hidden-state update, so junk in
// pad slots never reaches the sequence summary.

#include <string>
#include <vector>

#include "gailchat/optim.hpp"
#include "gailchat/rng.hpp"
#include "gailchat/tensor.hpp"

namespace gailchat {

template <class T>
Tensor<T> xavier_init(int rows, int cols, Rng& rng);

template <class T>
struct GruLayer {
  Tensor<T> w_z, u_z, b_z;
  Tensor<T> w_r, u_r, b_r;
  Tensor<T> w_n, u_n, b_n;

  static GruLayer create(int input, int hidden, ParamSet<T>& params, const std::string& prefix,
                         Rng& rng);
  static GruLayer from_params(ParamSet<T>& params, const std::string& prefix);

  int hidden() const { return w_z.rows(); }
  // x {B,input}, h {B,hidden} -> h' {B,hidden}
  Tensor<T> step(const Tensor<T>& x, const Tensor<T>& h) const;
};

// 2-layer bidirectional GRU over padded length-L batches.
template <class T>
struct BiGruEncoder {
  std::vector<GruLayer<T>> fwd, bwd;  // per layer
  int hidden_size = 0;

  static BiGruEncoder create(int input, int hidden, int layers, ParamSet<T>& params,
                             const std::string& prefix, Rng& rng);
  static BiGruEncoder from_params(ParamSet<T>& params, const std::string& prefix, int layers);

  struct Output {
    std::vector<Tensor<T>> outputs;    // per position: {B, 2H}
    std::vector<Tensor<T>> final_fwd;  // per layer: {B, H}
    std::vector<Tensor<T>> final_bwd;  // per layer: {B, H}
  };

  // inputs: per position {B, D}; step_mask: per position {B,1} with 1 at real
  // tokens. Every sequence must have a real token at position 0.
  Output run(const std::vector<Tensor<T>>& inputs, const std::vector<Tensor<T>>& step_mask) const;
};

}  // namespace gailchat
