#include "gailchat/train.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace gailchat {

void save_metrics_csv(const std::string& path, const std::vector<TrainMetrics>& metrics) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write metrics file " + path);
  f << "step,d_loss,p_loss,d_acc,mean_reward\n";
  char buf[160];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<long long>(m.step), m.d_loss, m.p_loss, m.d_acc, m.mean_reward);
    f << buf;
  }
}

namespace {

template <class T>
BcEpochMetrics eval_bc(const std::vector<DialogPair>& pairs, PolicyModel<T>& policy,
                       int batch_size) {
  NoGrad ng;
  double ce_sum = 0.0, cos_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t lo = 0; lo < pairs.size(); lo += batch_size) {
    const std::size_t hi = std::min(pairs.size(), lo + batch_size);
    std::vector<TokenSeq> states, actions;
    for (std::size_t i = lo; i < hi; ++i) {
      states.push_back(pairs[i].state);
      actions.push_back(pairs[i].action);
    }
    auto batch = policy.bc_loss(states, actions);
    ce_sum += static_cast<double>(batch.ce.item());
    cos_sum += batch.cosine;
    ++batches;
  }
  return {ce_sum / batches, cos_sum / batches};
}

}  // namespace

template <class T>
BcResult pretrain_bc(const std::vector<DialogPair>& pairs, PolicyModel<T>& policy, int epochs,
                     int batch_size, double lr, Rng& rng) {
  if (pairs.empty()) throw std::invalid_argument("pretrain_bc: no pairs");
  if (batch_size < 1) throw std::invalid_argument("pretrain_bc: batch_size must be >= 1");
  BcResult result;
  if (epochs == 0) return result;

  const auto initial = eval_bc(pairs, policy, batch_size);
  result.initial_ce = initial.ce;
  result.initial_cosine = initial.cosine;

  AdamConfig<T> acfg;
  acfg.lr = static_cast<T>(lr);
  Adam<T> adam(acfg);

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double ce_sum = 0.0, cos_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
      const std::size_t hi = std::min(order.size(), lo + batch_size);
      std::vector<TokenSeq> states, actions;
      for (std::size_t i = lo; i < hi; ++i) {
        states.push_back(pairs[order[i]].state);
        actions.push_back(pairs[order[i]].action);
      }
      auto batch = policy.bc_loss(states, actions);
      batch.ce.backward();
      adam.step(policy.params());
      ce_sum += static_cast<double>(batch.ce.item());
      cos_sum += batch.cosine;
      ++batches;
    }
    result.epochs.push_back({ce_sum / batches, cos_sum / batches});
  }
  return result;
}

template <class T>
GailTrainer<T>::GailTrainer(PolicyModel<T>& policy, DiscriminatorModel<T>& discrim, GailConfig cfg)
    : policy_(policy),
      discrim_(discrim),
      cfg_(cfg),
      adam_policy_(AdamConfig<T>{static_cast<T>(cfg.lr_policy), T(0.9), T(0.999), T(1e-8)}),
      adam_discrim_(AdamConfig<T>{static_cast<T>(cfg.lr_discrim), T(0.9), T(0.999), T(1e-8)}) {
  if (cfg.n_states < 1 || cfg.d_steps_per_p_step < 1 || cfg.batch_size < 1)
    throw std::invalid_argument("GailTrainer: all counts must be >= 1");
}

template <class T>
TrainMetrics GailTrainer<T>::step(const std::vector<TokenSeq>& states,
                                  const std::vector<TokenSeq>& expert_actions, Rng& rng) {
  if (states.empty() || states.size() != expert_actions.size())
    throw std::invalid_argument("gail step: bad batch");
  const int B = static_cast<int>(states.size());

  auto sampled_actions = [&]() {
    auto samples = policy_.sample_actions(states, false, cfg_.temperature, rng);
    std::vector<TokenSeq> actions;
    actions.reserve(samples.size());
    for (auto& s : samples) actions.push_back(std::move(s.tokens));
    return actions;
  };

  // (1)+(2): discriminator sub-steps on fresh policy samples
  double d_loss_sum = 0.0;
  std::vector<TokenSeq> reused;
  for (int k = 0; k < cfg_.d_steps_per_p_step; ++k) {
    std::vector<TokenSeq> pol_actions;
    if (cfg_.reuse_policy_samples) {
      if (k == 0) reused = sampled_actions();
      pol_actions = reused;
    } else {
      pol_actions = sampled_actions();
    }
    auto loss = discrim_.d_loss(states, pol_actions, states, expert_actions);
    loss.backward();
    adam_discrim_.step(discrim_.params());
    d_loss_sum += static_cast<double>(loss.item());
  }

  // (3): rewards from the post-update discriminator, captured as constants
  auto actions = sampled_actions();
  auto rewards = discrim_.rewards(states, actions);
  double batch_reward = 0.0;
  for (const auto& rv : rewards) batch_reward += rv.r;
  batch_reward /= B;
  reward_sum_ += batch_reward * B;
  reward_count_ += B;
  const double baseline = cfg_.baseline ? reward_sum_ / reward_count_ : 0.0;

  // (4): REINFORCE step on -mean(log pi * (r - b)) - coef * entropy
  auto tf = policy_.action_log_probs(states, actions);
  std::vector<T> weights(B);
  for (int b = 0; b < B; ++b) weights[b] = static_cast<T>(rewards[b].r - baseline);
  auto weighted = mul(tf.log_probs, Tensor<T>::from({B, 1}, std::move(weights)));
  auto surrogate = mul_scalar(sum(weighted), T(-1) / static_cast<T>(B));
  if (cfg_.entropy_coef != 0.0)
    surrogate = sub(surrogate, mul_scalar(tf.mean_entropy, static_cast<T>(cfg_.entropy_coef)));
  surrogate.backward();
  adam_policy_.step(policy_.params());

  TrainMetrics m;
  m.step = ++steps_;
  m.d_loss = d_loss_sum / cfg_.d_steps_per_p_step;
  m.p_loss = static_cast<double>(surrogate.item());
  m.d_acc = discrim_.d_accuracy(states, actions, states, expert_actions);
  m.mean_reward = batch_reward;
  return m;
}

template <class T>
GailRunResult gail_train(const std::vector<DialogPair>& pairs, PolicyModel<T>& policy,
                         DiscriminatorModel<T>& discrim, const GailConfig& cfg, Rng& rng) {
  if (pairs.empty()) throw std::invalid_argument("gail_train: no pairs");
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());

  std::size_t take = static_cast<std::size_t>(cfg.n_states);
  if (take > order.size()) {
    std::cerr << "warning: n_states " << cfg.n_states << " exceeds available pairs "
              << order.size() << "; training on all pairs once\n";
    take = order.size();
  }
  order.resize(take);

  GailTrainer<T> trainer(policy, discrim, cfg);
  GailRunResult result;
  const std::size_t batches = take / cfg.batch_size;
  for (std::size_t bi = 0; bi < batches; ++bi) {
    std::vector<TokenSeq> states, expert;
    for (std::size_t i = bi * cfg.batch_size; i < (bi + 1) * cfg.batch_size; ++i) {
      states.push_back(pairs[order[i]].state);
      expert.push_back(pairs[order[i]].action);
      result.consumed.push_back(order[i]);
    }
    result.metrics.push_back(trainer.step(states, expert, rng));
  }
  return result;
}

template BcResult pretrain_bc(const std::vector<DialogPair>&, PolicyModel<float>&, int, int, double, Rng&);
template BcResult pretrain_bc(const std::vector<DialogPair>&, PolicyModel<double>&, int, int, double, Rng&);
template class GailTrainer<float>;
template class GailTrainer<double>;
template GailRunResult gail_train(const std::vector<DialogPair>&, PolicyModel<float>&,
                                  DiscriminatorModel<float>&, const GailConfig&, Rng&);
template GailRunResult gail_train(const std::vector<DialogPair>&, PolicyModel<double>&,
                                  DiscriminatorModel<double>&, const GailConfig&, Rng&);

}  // namespace gailchat
