#pragma once

// Reward-signal probing: score expert, policy and random-noise actions per
// state, flag adversarial noise above an expert-reward percentile, rank
// extreme policy actions, and compare a BC policy against a GAIL policy.

#include <string>
#include <vector>

#include "gailchat/discrim.hpp"
#include "gailchat/pairs.hpp"
#include "gailchat/policy.hpp"
#include "gailchat/rng.hpp"
#include "gailchat/vocab.hpp"

namespace gailchat {

enum class ProbeSource { Expert, Policy, Noise };
const char* probe_source_name(ProbeSource s);

struct ProbeRow {
  TokenSeq state;
  TokenSeq action;
  ProbeSource source = ProbeSource::Expert;
  double d = 0.0;
  double reward = 0.0;
};

struct AdversarialFlag {
  ProbeRow row;          // source is always Noise
  double threshold = 0;  // the expert-reward percentile value it exceeded
};

// len tokens drawn uniformly from the vocabulary excluding <pad>, <sos>, <eos>.
TokenSeq random_action(const Vocabulary& vocab, int len, Rng& rng);

// One expert row, one stochastic policy row and noise_per_state noise rows per
// state, all scored with the discriminator reward. Scoring is read-only, so
// threads > 1 splits it across worker threads; the output is identical.
template <class T>
std::vector<ProbeRow> probe_rewards(const std::vector<DialogPair>& states,
                                    const PolicyModel<T>& policy,
                                    const DiscriminatorModel<T>& discrim,
                                    const Vocabulary& vocab, int noise_per_state, Rng& rng,
                                    int threads = 1);

// Nearest-rank percentile: smallest sample value with at least pct% of
// samples <= it.
double nearest_rank_percentile(std::vector<double> values, double pct);

// Noise rows whose reward strictly exceeds the pct-th percentile of expert
// rewards, sorted by reward descending. Throws when there is no expert row.
std::vector<AdversarialFlag> flag_adversarial(const std::vector<ProbeRow>& rows, double pct = 90);

// Top/bottom k policy rows by reward, ties in state order. Returns everything
// (with a warning) when fewer than k policy rows exist.
std::pair<std::vector<ProbeRow>, std::vector<ProbeRow>> rank_extremes(
    const std::vector<ProbeRow>& rows, int k);

struct CompareRow {
  TokenSeq state;
  TokenSeq expert_action;
  TokenSeq bc_action;  // greedy
  double bc_reward = 0.0;
  std::vector<TokenSeq> gail_actions;  // stochastic samples
  std::vector<double> gail_rewards;
  int best_gail = 0;  // index of the max-reward GAIL sample
};

template <class T>
std::vector<CompareRow> compare_policies(const std::vector<DialogPair>& states,
                                         const PolicyModel<T>& bc_policy,
                                         const PolicyModel<T>& gail_policy,
                                         const DiscriminatorModel<T>& discrim,
                                         int samples_per_state, Rng& rng);

struct HistogramRow {
  double lo = 0.0, hi = 0.0;
  std::size_t expert = 0, policy = 0, noise = 0;
};

// Equal-width bins partitioning [0, -log(kRewardClampEps)].
std::vector<HistogramRow> reward_histogram(const std::vector<ProbeRow>& rows, int bins);

void save_probe_jsonl(const std::string& path, const std::vector<ProbeRow>& rows,
                      const Vocabulary& vocab);
void save_histogram_csv(const std::string& path, const std::vector<HistogramRow>& hist);

}  // namespace gailchat
