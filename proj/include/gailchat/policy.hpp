#pragma once

// The stochastic dialog policy pi(a|s): 2-layer bidirectional GRU encoder
// with a linear+tanh bridge, 2-layer GRU decoder with Luong "general"
// attention and input feeding, and a vocabulary-wide output head over the
// frozen embedding table.
//
// The sampling distribution masks <pad> at every step and <eos> at step 0
// (so sampled actions are never empty). Teacher-forced scoring uses the same
// masked distribution; targets are the action tokens plus a terminal <eos>
// when the action is shorter than max_len.

#include <cstdint>
#include <string>
#include <vector>

#include "gailchat/checkpoint.hpp"
#include "gailchat/embedding.hpp"
#include "gailchat/gru.hpp"
#include "gailchat/optim.hpp"
#include "gailchat/rng.hpp"
#include "gailchat/tensor.hpp"
#include "gailchat/vocab.hpp"

namespace gailchat {

struct PolicyConfig {
  int hidden = 128;
  int layers = 2;
  int max_len = 5;
  double temperature = 1.0;
};

struct ActionSample {
  TokenSeq tokens;        // content tokens, no <sos>/<eos>
  double log_prob = 0.0;  // selected-token log probs, incl. <eos> when emitted
};

template <class T>
class PolicyModel {
 public:
  PolicyModel(const EmbeddingMatrix& emb, PolicyConfig cfg, Rng& rng);
  static PolicyModel from_checkpoint(const CheckpointData& ckpt, PolicyConfig cfg);
  std::vector<std::pair<std::string, NamedValues>> dump() const;

  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  const PolicyConfig& config() const { return cfg_; }
  int vocab_size() const { return embedding_.rows(); }
  const Tensor<T>& embedding() const { return embedding_; }

  struct Encoded {
    std::vector<Tensor<T>> enc_outputs;   // L x {B,2H}
    std::vector<Tensor<T>> init_hidden;   // layers x {B,H}
    std::vector<Tensor<T>> step_mask;     // L x {B,1}, 1 at real tokens
    std::vector<std::uint8_t> attn_fill;  // B*L, 1 at pad positions
    int batch = 0;
  };
  Encoded encode(const std::vector<TokenSeq>& states) const;

  struct DecoderState {
    std::vector<Tensor<T>> hidden;  // per layer {B,H}
    Tensor<T> context;              // {B,2H}
  };
  DecoderState initial_state(const Encoded& enc) const;

  struct StepOut {
    Tensor<T> logits;  // raw {B,V}
    Tensor<T> attn;    // {B,L}, zero at pads, rows sum to 1
  };
  StepOut decode_step(const std::vector<int>& prev_ids, DecoderState& state,
                      const Encoded& enc) const;

  // distribution mask: <pad> everywhere, <eos> additionally at step 0
  Tensor<T> dist_masked(const Tensor<T>& logits, int step) const;

  std::vector<ActionSample> sample_actions(const std::vector<TokenSeq>& states, bool greedy,
                                           double temperature, Rng& rng) const;
  ActionSample sample_action(const TokenSeq& state, bool greedy, double temperature,
                             Rng& rng) const;

  struct TeacherForced {
    Tensor<T> log_probs;     // {B,1}
    Tensor<T> mean_entropy;  // scalar, sampling-distribution entropy over active steps
  };
  TeacherForced action_log_probs(const std::vector<TokenSeq>& states,
                                 const std::vector<TokenSeq>& actions) const;

  struct BcBatch {
    Tensor<T> ce;        // scalar, mean over target positions
    double cosine;       // mean greedy-vs-target embedding cosine
  };
  BcBatch bc_loss(const std::vector<TokenSeq>& states, const std::vector<TokenSeq>& actions) const;

 private:
  PolicyModel() = default;
  void build_params(Rng& rng);

  PolicyConfig cfg_;
  Tensor<T> embedding_;  // {V,D}, frozen
  ParamSet<T> params_;
  BiGruEncoder<T> encoder_;
  std::vector<Tensor<T>> bridge_w_, bridge_b_;  // per layer: {H,2H}, {H}
  std::vector<GruLayer<T>> decoder_;
  Tensor<T> attn_w_;        // {H,2H}
  Tensor<T> head_w_, head_b_;  // {H,3H}, {H}
  Tensor<T> out_w_, out_b_;    // {V,H}, {V}
};

}  // namespace gailchat
