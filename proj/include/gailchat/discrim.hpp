#pragma once

// The discriminator D(s,a): two bidirectional GRU encoders (state and
// action) over the shared frozen embedding, top-layer final states
// concatenated into a linear+tanh+linear+sigmoid head. Output reads as the
// probability the pair is learner-generated (1 = learner, 0 = expert), and
// the reward proxy is r(s,a) = -log(clamp(D, eps, 1-eps)).

#include <cstdint>
#include <string>
#include <vector>

#include "gailchat/checkpoint.hpp"
#include "gailchat/embedding.hpp"
#include "gailchat/gru.hpp"
#include "gailchat/optim.hpp"
#include "gailchat/policy.hpp"
#include "gailchat/tensor.hpp"
#include "gailchat/vocab.hpp"

namespace gailchat {

struct RewardValue {
  double d = 0.0;  // D(s,a) in (0,1)
  double r = 0.0;  // -log(clamp(d)), in (0, -log(eps)]
};

constexpr double kRewardClampEps = 1e-7;

double reward_from_d(double d);

template <class T>
class DiscriminatorModel {
 public:
  DiscriminatorModel(const EmbeddingMatrix& emb, PolicyConfig cfg, Rng& rng);
  static DiscriminatorModel from_checkpoint(const CheckpointData& ckpt, PolicyConfig cfg);
  std::vector<std::pair<std::string, NamedValues>> dump() const;

  // copies the policy's encoder weights into both discriminator encoders
  void init_encoders_from(const ParamSet<T>& policy_params);

  ParamSet<T>& params() { return params_; }
  const PolicyConfig& config() const { return cfg_; }
  int vocab_size() const { return embedding_.rows(); }

  // pre-sigmoid head outputs {B,1}; differentiable
  Tensor<T> d_logits(const std::vector<TokenSeq>& states,
                     const std::vector<TokenSeq>& actions) const;
  // probabilities in (0,1), {B,1}
  Tensor<T> d_forward_batch(const std::vector<TokenSeq>& states,
                            const std::vector<TokenSeq>& actions) const;
  double d_forward(const TokenSeq& state, const TokenSeq& action) const;

  RewardValue reward(const TokenSeq& state, const TokenSeq& action) const;
  std::vector<RewardValue> rewards(const std::vector<TokenSeq>& states,
                                   const std::vector<TokenSeq>& actions) const;

  // -mean log D(policy) - mean log(1-D(expert)); labels learner=1, expert=0
  Tensor<T> d_loss(const std::vector<TokenSeq>& policy_states,
                   const std::vector<TokenSeq>& policy_actions,
                   const std::vector<TokenSeq>& expert_states,
                   const std::vector<TokenSeq>& expert_actions) const;

  // threshold 0.5; D == 0.5 counts as incorrect
  double d_accuracy(const std::vector<TokenSeq>& policy_states,
                    const std::vector<TokenSeq>& policy_actions,
                    const std::vector<TokenSeq>& expert_states,
                    const std::vector<TokenSeq>& expert_actions) const;

 private:
  DiscriminatorModel() = default;
  void build_params(Rng& rng);
  // top-layer forward+backward final states of one encoder {B,2H}
  Tensor<T> encode_summary(const BiGruEncoder<T>& enc, const std::vector<TokenSeq>& seqs) const;

  PolicyConfig cfg_;
  Tensor<T> embedding_;
  ParamSet<T> params_;
  BiGruEncoder<T> state_enc_, action_enc_;
  Tensor<T> head1_w_, head1_b_;  // {H,4H}, {H}
  Tensor<T> head2_w_, head2_b_;  // {1,H}, {1}
};

}  // namespace gailchat
