#include "gailchat/discrim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gailchat {

double reward_from_d(double d) {
  const double clamped = std::min(std::max(d, kRewardClampEps), 1.0 - kRewardClampEps);
  return -std::log(clamped);
}

namespace {
constexpr int kPadId = 0;

template <class T>
Tensor<T> embedding_tensor(const EmbeddingMatrix& emb) {
  std::vector<T> data(emb.values().begin(), emb.values().end());
  return Tensor<T>::from({static_cast<int>(emb.size()), emb.dim()}, std::move(data), false);
}
}  // namespace

template <class T>
DiscriminatorModel<T>::DiscriminatorModel(const EmbeddingMatrix& emb, PolicyConfig cfg, Rng& rng) {
  cfg_ = cfg;
  embedding_ = embedding_tensor<T>(emb);
  build_params(rng);
}

template <class T>
void DiscriminatorModel<T>::build_params(Rng& rng) {
  const int h = cfg_.hidden;
  const int dim = embedding_.cols();
  state_enc_ = BiGruEncoder<T>::create(dim, h, cfg_.layers, params_, "state_enc", rng);
  action_enc_ = BiGruEncoder<T>::create(dim, h, cfg_.layers, params_, "action_enc", rng);
  head1_w_ = params_.add("head1.w", xavier_init<T>(h, 4 * h, rng));
  head1_b_ = params_.add("head1.b", Tensor<T>::zeros({h}, true));
  head2_w_ = params_.add("head2.w", xavier_init<T>(1, h, rng));
  head2_b_ = params_.add("head2.b", Tensor<T>::zeros({1}, true));
}

template <class T>
DiscriminatorModel<T> DiscriminatorModel<T>::from_checkpoint(const CheckpointData& ckpt,
                                                             PolicyConfig cfg) {
  auto it = ckpt.find("embedding");
  if (it == ckpt.end()) throw std::runtime_error("discriminator checkpoint has no embedding entry");
  DiscriminatorModel model;
  model.cfg_ = cfg;
  model.embedding_ = tensor_from_values<T>(it->second, false);
  Rng init_rng(0);
  model.build_params(init_rng);
  for (const auto& entry : model.params_.entries()) {
    auto found = ckpt.find(entry.name);
    if (found == ckpt.end())
      throw std::runtime_error("discriminator checkpoint missing parameter " + entry.name);
    if (found->second.shape != entry.tensor.shape())
      throw std::runtime_error("discriminator checkpoint shape mismatch for " + entry.name);
    auto dst = model.params_.at(entry.name).data();
    const auto& src = found->second.values;
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
  }
  return model;
}

template <class T>
std::vector<std::pair<std::string, NamedValues>> DiscriminatorModel<T>::dump() const {
  std::vector<std::pair<std::string, NamedValues>> out;
  out.emplace_back("embedding", to_named_values(embedding_));
  for (const auto& entry : params_.entries()) out.emplace_back(entry.name, to_named_values(entry.tensor));
  return out;
}

template <class T>
void DiscriminatorModel<T>::init_encoders_from(const ParamSet<T>& policy_params) {
  for (auto& entry : const_cast<std::vector<typename ParamSet<T>::Entry>&>(params_.entries())) {
    std::string source;
    if (entry.name.rfind("state_enc.", 0) == 0)
      source = "enc." + entry.name.substr(std::string("state_enc.").size());
    else if (entry.name.rfind("action_enc.", 0) == 0)
      source = "enc." + entry.name.substr(std::string("action_enc.").size());
    else
      continue;
    const auto& src = policy_params.at(source);
    if (src.shape() != entry.tensor.shape())
      throw std::runtime_error("init_encoders_from: shape mismatch for " + entry.name);
    auto dst = entry.tensor.data();
    auto s = src.data();
    std::copy(s.begin(), s.end(), dst.begin());
  }
}

template <class T>
Tensor<T> DiscriminatorModel<T>::encode_summary(const BiGruEncoder<T>& enc,
                                                const std::vector<TokenSeq>& seqs) const {
  const int L = cfg_.max_len;
  const int B = static_cast<int>(seqs.size());
  const int V = vocab_size();
  for (const auto& s : seqs) {
    if (s.empty()) throw std::invalid_argument("discriminator: empty sequence");
    if (s.size() > static_cast<std::size_t>(L))
      throw std::invalid_argument("discriminator: sequence longer than max_len");
    for (int id : s)
      if (id < 0 || id >= V) throw std::invalid_argument("discriminator: token id out of range");
  }
  std::vector<Tensor<T>> inputs, step_mask;
  for (int t = 0; t < L; ++t) {
    std::vector<int> ids(B, kPadId);
    std::vector<T> mask(B, T(0));
    for (int b = 0; b < B; ++b)
      if (t < static_cast<int>(seqs[b].size())) {
        ids[b] = seqs[b][t];
        mask[b] = T(1);
      }
    inputs.push_back(gather_rows(embedding_, ids));
    step_mask.push_back(Tensor<T>::from({B, 1}, std::move(mask)));
  }
  auto run = enc.run(inputs, step_mask);
  return concat_cols<T>({run.final_fwd.back(), run.final_bwd.back()});
}

template <class T>
Tensor<T> DiscriminatorModel<T>::d_logits(const std::vector<TokenSeq>& states,
                                          const std::vector<TokenSeq>& actions) const {
  if (states.empty() || states.size() != actions.size())
    throw std::invalid_argument("d_logits: bad batch");
  auto s = encode_summary(state_enc_, states);
  auto a = encode_summary(action_enc_, actions);
  auto hidden = tanh_t(linear(concat_cols<T>({s, a}), head1_w_, head1_b_));
  return linear(hidden, head2_w_, head2_b_);
}

template <class T>
Tensor<T> DiscriminatorModel<T>::d_forward_batch(const std::vector<TokenSeq>& states,
                                                 const std::vector<TokenSeq>& actions) const {
  return sigmoid(d_logits(states, actions));
}

template <class T>
double DiscriminatorModel<T>::d_forward(const TokenSeq& state, const TokenSeq& action) const {
  NoGrad ng;
  return static_cast<double>(d_forward_batch({state}, {action}).item());
}

template <class T>
RewardValue DiscriminatorModel<T>::reward(const TokenSeq& state, const TokenSeq& action) const {
  RewardValue rv;
  rv.d = d_forward(state, action);
  rv.r = reward_from_d(rv.d);
  return rv;
}

template <class T>
std::vector<RewardValue> DiscriminatorModel<T>::rewards(const std::vector<TokenSeq>& states,
                                                        const std::vector<TokenSeq>& actions) const {
  NoGrad ng;
  auto d = d_forward_batch(states, actions);
  std::vector<RewardValue> out(states.size());
  auto data = d.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].d = static_cast<double>(data[i]);
    out[i].r = reward_from_d(out[i].d);
  }
  return out;
}

template <class T>
Tensor<T> DiscriminatorModel<T>::d_loss(const std::vector<TokenSeq>& policy_states,
                                        const std::vector<TokenSeq>& policy_actions,
                                        const std::vector<TokenSeq>& expert_states,
                                        const std::vector<TokenSeq>& expert_actions) const {
  if (policy_states.empty() || expert_states.empty())
    throw std::invalid_argument("d_loss: empty batch");
  // -log D = softplus(-logit), -log(1-D) = softplus(logit)
  auto pol = d_logits(policy_states, policy_actions);
  auto exp = d_logits(expert_states, expert_actions);
  auto policy_part = mean(softplus(mul_scalar(pol, T(-1))));
  auto expert_part = mean(softplus(exp));
  return add(policy_part, expert_part);
}

template <class T>
double DiscriminatorModel<T>::d_accuracy(const std::vector<TokenSeq>& policy_states,
                                         const std::vector<TokenSeq>& policy_actions,
                                         const std::vector<TokenSeq>& expert_states,
                                         const std::vector<TokenSeq>& expert_actions) const {
  if (policy_states.empty() || expert_states.empty())
    throw std::invalid_argument("d_accuracy: empty batch");
  NoGrad ng;
  std::size_t correct = 0;
  auto dp = d_forward_batch(policy_states, policy_actions);
  for (auto v : dp.data())
    if (static_cast<double>(v) > 0.5) ++correct;
  auto de = d_forward_batch(expert_states, expert_actions);
  for (auto v : de.data())
    if (static_cast<double>(v) < 0.5) ++correct;
  return static_cast<double>(correct) /
         static_cast<double>(policy_states.size() + expert_states.size());
}

template class DiscriminatorModel<float>;
template class DiscriminatorModel<double>;

}  // namespace gailchat
