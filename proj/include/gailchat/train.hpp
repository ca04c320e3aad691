#pragma once

// Behavioral-cloning pretraining and the modified adversarial imitation
// loop: per policy step, d_steps_per_p_step discriminator Adam updates on
// fresh policy samples, then one REINFORCE step on the post-update rewards
// (treated as constants).

#include <cstdint>
#include <string>
#include <vector>

#include "gailchat/discrim.hpp"
#include "gailchat/optim.hpp"
#include "gailchat/pairs.hpp"
#include "gailchat/policy.hpp"
#include "gailchat/rng.hpp"

namespace gailchat {

struct MdpConfig {
  double gamma = 1.0;  // recorded for completeness; this environment never discounts
  int max_turns = 1;
  int max_len = 5;
};

struct GailConfig {
  int n_states = 12000;
  int d_steps_per_p_step = 5;
  int batch_size = 32;
  double entropy_coef = 0.0;
  bool baseline = false;               // subtract the running mean reward
  bool reuse_policy_samples = false;   // reuse one sample set across the d sub-steps
  double lr_policy = 1e-4;
  double lr_discrim = 1e-4;
  double temperature = 1.0;
};

struct TrainMetrics {
  std::int64_t step = 0;
  double d_loss = 0.0;  // mean over the discriminator sub-steps
  double p_loss = 0.0;
  double d_acc = 0.0;
  double mean_reward = 0.0;
};

void save_metrics_csv(const std::string& path, const std::vector<TrainMetrics>& metrics);

struct BcEpochMetrics {
  double ce = 0.0;
  double cosine = 0.0;
};

struct BcResult {
  std::vector<BcEpochMetrics> epochs;  // one row per epoch
  double initial_ce = 0.0;             // evaluation before any update
  double initial_cosine = 0.0;
};

template <class T>
BcResult pretrain_bc(const std::vector<DialogPair>& pairs, PolicyModel<T>& policy, int epochs,
                     int batch_size, double lr, Rng& rng);

template <class T>
class GailTrainer {
 public:
  GailTrainer(PolicyModel<T>& policy, DiscriminatorModel<T>& discrim, GailConfig cfg);

  // expert_actions[i] is the corpus action for states[i]
  TrainMetrics step(const std::vector<TokenSeq>& states,
                    const std::vector<TokenSeq>& expert_actions, Rng& rng);

  std::int64_t policy_updates() const { return adam_policy_.step_count(); }
  std::int64_t discrim_updates() const { return adam_discrim_.step_count(); }
  double running_mean_reward() const { return reward_count_ ? reward_sum_ / reward_count_ : 0.0; }

 private:
  PolicyModel<T>& policy_;
  DiscriminatorModel<T>& discrim_;
  GailConfig cfg_;
  Adam<T> adam_policy_;
  Adam<T> adam_discrim_;
  double reward_sum_ = 0.0;
  double reward_count_ = 0.0;
  std::int64_t steps_ = 0;
};

struct GailRunResult {
  std::vector<TrainMetrics> metrics;       // one row per policy step
  std::vector<std::size_t> consumed;       // state indices, without replacement
};

template <class T>
GailRunResult gail_train(const std::vector<DialogPair>& pairs, PolicyModel<T>& policy,
                         DiscriminatorModel<T>& discrim, const GailConfig& cfg, Rng& rng);

}  // namespace gailchat
