#include "gailchat/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace gailchat {

const char* probe_source_name(ProbeSource s) {
  switch (s) {
    case ProbeSource::Expert: return "expert";
    case ProbeSource::Policy: return "policy";
    case ProbeSource::Noise: return "noise";
  }
  return "?";
}

TokenSeq random_action(const Vocabulary& vocab, int len, Rng& rng) {
  const int first = static_cast<int>(vocab.eos_id()) + 1;  // skip <pad>, <sos>, <eos>
  const int span = static_cast<int>(vocab.size()) - first;
  if (span < 1) throw std::invalid_argument("random_action: vocabulary has no drawable tokens");
  TokenSeq out;
  out.reserve(len);
  for (int i = 0; i < len; ++i)
    out.push_back(first + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(span))));
  return out;
}

namespace {

template <class T>
void score_span(std::vector<ProbeRow>& rows, std::size_t begin, std::size_t end,
                const DiscriminatorModel<T>& discrim) {
  constexpr std::size_t kChunk = 256;
  for (std::size_t lo = begin; lo < end; lo += kChunk) {
    const std::size_t hi = std::min(end, lo + kChunk);
    std::vector<TokenSeq> states, actions;
    for (std::size_t i = lo; i < hi; ++i) {
      states.push_back(rows[i].state);
      actions.push_back(rows[i].action);
    }
    auto rewards = discrim.rewards(states, actions);
    for (std::size_t i = lo; i < hi; ++i) {
      rows[i].d = rewards[i - lo].d;
      rows[i].reward = rewards[i - lo].r;
    }
  }
}

// read-only scoring over frozen parameters; rows land in fixed slots, so the
// result does not depend on the thread count
template <class T>
void score_rows(std::vector<ProbeRow>& rows, const DiscriminatorModel<T>& discrim, int threads) {
  if (threads <= 1 || rows.size() < 2) {
    score_span(rows, 0, rows.size(), discrim);
    return;
  }
  const std::size_t n = static_cast<std::size_t>(threads);
  std::vector<std::thread> workers;
  const std::size_t per = (rows.size() + n - 1) / n;
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t begin = w * per;
    const std::size_t end = std::min(rows.size(), begin + per);
    if (begin >= end) break;
    workers.emplace_back([&rows, begin, end, &discrim] { score_span(rows, begin, end, discrim); });
  }
  for (auto& t : workers) t.join();
}

}  // namespace

template <class T>
std::vector<ProbeRow> probe_rewards(const std::vector<DialogPair>& states,
                                    const PolicyModel<T>& policy,
                                    const DiscriminatorModel<T>& discrim,
                                    const Vocabulary& vocab, int noise_per_state, Rng& rng,
                                    int threads) {
  if (states.empty()) throw std::invalid_argument("probe_rewards: no states");

  // policy samples in batches
  std::vector<TokenSeq> policy_actions;
  constexpr std::size_t kChunk = 64;
  for (std::size_t lo = 0; lo < states.size(); lo += kChunk) {
    const std::size_t hi = std::min(states.size(), lo + kChunk);
    std::vector<TokenSeq> batch;
    for (std::size_t i = lo; i < hi; ++i) batch.push_back(states[i].state);
    auto samples = policy.sample_actions(batch, false, policy.config().temperature, rng);
    for (auto& s : samples) policy_actions.push_back(std::move(s.tokens));
  }

  std::vector<ProbeRow> rows;
  rows.reserve(states.size() * (2 + noise_per_state));
  for (std::size_t i = 0; i < states.size(); ++i) {
    rows.push_back({states[i].state, states[i].action, ProbeSource::Expert, 0, 0});
    rows.push_back({states[i].state, policy_actions[i], ProbeSource::Policy, 0, 0});
    for (int k = 0; k < noise_per_state; ++k)
      rows.push_back({states[i].state, random_action(vocab, policy.config().max_len, rng),
                      ProbeSource::Noise, 0, 0});
  }
  score_rows(rows, discrim, threads);
  return rows;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("nearest_rank_percentile: no values");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
  rank = std::max<std::size_t>(1, std::min<std::size_t>(rank, values.size()));
  return values[rank - 1];
}

std::vector<AdversarialFlag> flag_adversarial(const std::vector<ProbeRow>& rows, double pct) {
  std::vector<double> expert_rewards;
  for (const auto& r : rows)
    if (r.source == ProbeSource::Expert) expert_rewards.push_back(r.reward);
  if (expert_rewards.empty()) throw std::invalid_argument("flag_adversarial: no expert rows");
  const double threshold = nearest_rank_percentile(std::move(expert_rewards), pct);

  std::vector<AdversarialFlag> flags;
  for (const auto& r : rows)
    if (r.source == ProbeSource::Noise && r.reward > threshold) flags.push_back({r, threshold});
  std::stable_sort(flags.begin(), flags.end(),
                   [](const auto& a, const auto& b) { return a.row.reward > b.row.reward; });
  return flags;
}

std::pair<std::vector<ProbeRow>, std::vector<ProbeRow>> rank_extremes(
    const std::vector<ProbeRow>& rows, int k) {
  std::vector<ProbeRow> policy_rows;
  for (const auto& r : rows)
    if (r.source == ProbeSource::Policy) policy_rows.push_back(r);
  if (static_cast<int>(policy_rows.size()) < k) {
    std::cerr << "warning: rank_extremes asked for " << k << " rows, only "
              << policy_rows.size() << " policy rows available\n";
    k = static_cast<int>(policy_rows.size());
  }
  std::vector<ProbeRow> top = policy_rows;
  std::stable_sort(top.begin(), top.end(),
                   [](const auto& a, const auto& b) { return a.reward > b.reward; });
  top.resize(k);
  std::vector<ProbeRow> bottom = policy_rows;
  std::stable_sort(bottom.begin(), bottom.end(),
                   [](const auto& a, const auto& b) { return a.reward < b.reward; });
  bottom.resize(k);
  return {top, bottom};
}

template <class T>
std::vector<CompareRow> compare_policies(const std::vector<DialogPair>& states,
                                         const PolicyModel<T>& bc_policy,
                                         const PolicyModel<T>& gail_policy,
                                         const DiscriminatorModel<T>& discrim,
                                         int samples_per_state, Rng& rng) {
  std::vector<CompareRow> out;
  for (const auto& pair : states) {
    CompareRow row;
    row.state = pair.state;
    row.expert_action = pair.action;
    row.bc_action = bc_policy.sample_action(pair.state, true, 1.0, rng).tokens;
    row.bc_reward = discrim.reward(pair.state, row.bc_action).r;
    for (int s = 0; s < samples_per_state; ++s) {
      auto sample = gail_policy.sample_action(pair.state, false, gail_policy.config().temperature, rng);
      row.gail_rewards.push_back(discrim.reward(pair.state, sample.tokens).r);
      row.gail_actions.push_back(std::move(sample.tokens));
    }
    row.best_gail = static_cast<int>(std::max_element(row.gail_rewards.begin(), row.gail_rewards.end()) -
                                     row.gail_rewards.begin());
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<HistogramRow> reward_histogram(const std::vector<ProbeRow>& rows, int bins) {
  if (bins < 1) throw std::invalid_argument("reward_histogram: bins must be >= 1");
  const double max_r = -std::log(kRewardClampEps);
  std::vector<HistogramRow> hist(bins);
  for (int i = 0; i < bins; ++i) {
    hist[i].lo = max_r * i / bins;
    hist[i].hi = max_r * (i + 1) / bins;
  }
  for (const auto& r : rows) {
    int idx = static_cast<int>(r.reward / max_r * bins);
    idx = std::max(0, std::min(bins - 1, idx));
    switch (r.source) {
      case ProbeSource::Expert: ++hist[idx].expert; break;
      case ProbeSource::Policy: ++hist[idx].policy; break;
      case ProbeSource::Noise: ++hist[idx].noise; break;
    }
  }
  return hist;
}

void save_probe_jsonl(const std::string& path, const std::vector<ProbeRow>& rows,
                      const Vocabulary& vocab) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write probe report " + path);
  char buf[64];
  for (const auto& r : rows) {
    nlohmann::json j;
    j["state"] = vocab.decode(r.state);
    j["action"] = vocab.decode(r.action);
    j["source"] = probe_source_name(r.source);
    std::snprintf(buf, sizeof(buf), "%.6f", r.d);
    j["d"] = std::stod(buf);
    std::snprintf(buf, sizeof(buf), "%.6f", r.reward);
    j["reward"] = std::stod(buf);
    f << j.dump() << "\n";
  }
}

void save_histogram_csv(const std::string& path, const std::vector<HistogramRow>& hist) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write histogram " + path);
  f << "bin_lo,bin_hi,expert_count,policy_count,noise_count\n";
  char buf[160];
  for (const auto& h : hist) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%zu,%zu,%zu\n", h.lo, h.hi, h.expert, h.policy,
                  h.noise);
    f << buf;
  }
}

template std::vector<ProbeRow> probe_rewards(const std::vector<DialogPair>&,
                                             const PolicyModel<float>&,
                                             const DiscriminatorModel<float>&, const Vocabulary&,
                                             int, Rng&, int);
template std::vector<ProbeRow> probe_rewards(const std::vector<DialogPair>&,
                                             const PolicyModel<double>&,
                                             const DiscriminatorModel<double>&, const Vocabulary&,
                                             int, Rng&, int);
template std::vector<CompareRow> compare_policies(const std::vector<DialogPair>&,
                                                  const PolicyModel<float>&,
                                                  const PolicyModel<float>&,
                                                  const DiscriminatorModel<float>&, int, Rng&);
template std::vector<CompareRow> compare_policies(const std::vector<DialogPair>&,
                                                  const PolicyModel<double>&,
                                                  const PolicyModel<double>&,
                                                  const DiscriminatorModel<double>&, int, Rng&);

}  // namespace gailchat
