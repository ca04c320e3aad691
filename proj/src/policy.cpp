#include "gailchat/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gailchat/kernels.hpp"

namespace gailchat {

namespace {

constexpr int kPadId = 0;
constexpr int kSosId = 1;
constexpr int kEosId = 2;

template <class T>
Tensor<T> embedding_tensor(const EmbeddingMatrix& emb) {
  std::vector<T> data(emb.values().begin(), emb.values().end());
  return Tensor<T>::from({static_cast<int>(emb.size()), emb.dim()}, std::move(data), false);
}

// number of teacher-forcing targets: the action tokens plus <eos> if it fits
std::size_t target_count(const TokenSeq& action, int max_len) {
  return action.size() + (action.size() < static_cast<std::size_t>(max_len) ? 1 : 0);
}

}  // namespace

template <class T>
PolicyModel<T>::PolicyModel(const EmbeddingMatrix& emb, PolicyConfig cfg, Rng& rng) {
  cfg_ = cfg;
  embedding_ = embedding_tensor<T>(emb);
  build_params(rng);
}

template <class T>
void PolicyModel<T>::build_params(Rng& rng) {
  const int h = cfg_.hidden;
  const int dim = embedding_.cols();
  const int v = embedding_.rows();

  encoder_ = BiGruEncoder<T>::create(dim, h, cfg_.layers, params_, "enc", rng);
  for (int l = 0; l < cfg_.layers; ++l) {
    bridge_w_.push_back(params_.add("bridge.l" + std::to_string(l) + ".w", xavier_init<T>(h, 2 * h, rng)));
    bridge_b_.push_back(params_.add("bridge.l" + std::to_string(l) + ".b", Tensor<T>::zeros({h}, true)));
  }
  for (int l = 0; l < cfg_.layers; ++l) {
    const int in = l == 0 ? dim + 2 * h : h;
    decoder_.push_back(GruLayer<T>::create(in, h, params_, "dec.l" + std::to_string(l), rng));
  }
  attn_w_ = params_.add("attn.w", xavier_init<T>(h, 2 * h, rng));
  head_w_ = params_.add("head.w", xavier_init<T>(h, 3 * h, rng));
  head_b_ = params_.add("head.b", Tensor<T>::zeros({h}, true));
  out_w_ = params_.add("out.w", xavier_init<T>(v, h, rng));
  out_b_ = params_.add("out.b", Tensor<T>::zeros({v}, true));
}

template <class T>
PolicyModel<T> PolicyModel<T>::from_checkpoint(const CheckpointData& ckpt, PolicyConfig cfg) {
  auto it = ckpt.find("embedding");
  if (it == ckpt.end()) throw std::runtime_error("policy checkpoint has no embedding entry");

  PolicyModel model;
  model.cfg_ = cfg;
  model.embedding_ = tensor_from_values<T>(it->second, false);
  Rng init_rng(0);
  model.build_params(init_rng);

  for (const auto& entry : model.params_.entries()) {
    auto found = ckpt.find(entry.name);
    if (found == ckpt.end())
      throw std::runtime_error("policy checkpoint missing parameter " + entry.name);
    if (found->second.shape != entry.tensor.shape())
      throw std::runtime_error("policy checkpoint shape mismatch for " + entry.name + ": " +
                               shape_str(found->second.shape) + " vs " +
                               shape_str(entry.tensor.shape()));
    auto dst = model.params_.at(entry.name).data();
    const auto& src = found->second.values;
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
  }
  return model;
}

template <class T>
std::vector<std::pair<std::string, NamedValues>> PolicyModel<T>::dump() const {
  std::vector<std::pair<std::string, NamedValues>> out;
  out.emplace_back("embedding", to_named_values(embedding_));
  for (const auto& entry : params_.entries()) out.emplace_back(entry.name, to_named_values(entry.tensor));
  return out;
}

template <class T>
typename PolicyModel<T>::Encoded PolicyModel<T>::encode(const std::vector<TokenSeq>& states) const {
  if (states.empty()) throw std::invalid_argument("encode: empty batch");
  const int L = cfg_.max_len;
  const int B = static_cast<int>(states.size());
  const int V = vocab_size();
  for (const auto& s : states) {
    if (s.empty()) throw std::invalid_argument("encode: empty state");
    if (s.size() > static_cast<std::size_t>(L))
      throw std::invalid_argument("encode: state longer than max_len");
    for (int id : s)
      if (id < 0 || id >= V) throw std::invalid_argument("encode: token id out of range");
  }

  Encoded enc;
  enc.batch = B;
  enc.attn_fill.assign(static_cast<std::size_t>(B) * L, 0);
  std::vector<Tensor<T>> inputs;
  for (int t = 0; t < L; ++t) {
    std::vector<int> ids(B, kPadId);
    std::vector<T> mask(B, T(0));
    for (int b = 0; b < B; ++b) {
      if (t < static_cast<int>(states[b].size())) {
        ids[b] = states[b][t];
        mask[b] = T(1);
      } else {
        enc.attn_fill[static_cast<std::size_t>(b) * L + t] = 1;
      }
    }
    inputs.push_back(gather_rows(embedding_, ids));
    enc.step_mask.push_back(Tensor<T>::from({B, 1}, std::move(mask)));
  }

  auto run = encoder_.run(inputs, enc.step_mask);
  enc.enc_outputs = std::move(run.outputs);
  for (int l = 0; l < cfg_.layers; ++l) {
    auto both = concat_cols<T>({run.final_fwd[l], run.final_bwd[l]});
    enc.init_hidden.push_back(tanh_t(linear(both, bridge_w_[l], bridge_b_[l])));
  }
  return enc;
}

template <class T>
typename PolicyModel<T>::DecoderState PolicyModel<T>::initial_state(const Encoded& enc) const {
  DecoderState st;
  st.hidden = enc.init_hidden;
  st.context = Tensor<T>::zeros({enc.batch, 2 * cfg_.hidden});
  return st;
}

template <class T>
typename PolicyModel<T>::StepOut PolicyModel<T>::decode_step(const std::vector<int>& prev_ids,
                                                             DecoderState& state,
                                                             const Encoded& enc) const {
  const int L = cfg_.max_len;
  auto x = concat_cols<T>({gather_rows(embedding_, prev_ids), state.context});
  std::vector<Tensor<T>> new_hidden;
  Tensor<T> h = x;
  for (int l = 0; l < cfg_.layers; ++l) {
    h = decoder_[l].step(h, state.hidden[l]);
    new_hidden.push_back(h);
  }
  const Tensor<T>& top = new_hidden.back();

  // Luong general attention: score_t = h_dec^T Wa enc_t, pads at -inf
  Tensor<T> none;
  std::vector<Tensor<T>> scores;
  for (int t = 0; t < L; ++t)
    scores.push_back(row_sum(mul(linear(enc.enc_outputs[t], attn_w_, none), top)));
  auto attn = softmax_rows(masked_fill(concat_cols<T>(scores), enc.attn_fill,
                                       -std::numeric_limits<T>::infinity()));

  Tensor<T> context;
  for (int t = 0; t < L; ++t) {
    auto part = scale_rows(enc.enc_outputs[t], slice_cols(attn, t, 1));
    context = t == 0 ? part : add(context, part);
  }

  auto pre = tanh_t(linear(concat_cols<T>({context, top}), head_w_, head_b_));
  auto logits = linear(pre, out_w_, out_b_);

  state.hidden = std::move(new_hidden);
  state.context = context;
  return {logits, attn};
}

template <class T>
Tensor<T> PolicyModel<T>::dist_masked(const Tensor<T>& logits, int step) const {
  const int B = logits.rows();
  const int V = logits.cols();
  std::vector<std::uint8_t> fill(static_cast<std::size_t>(B) * V, 0);
  for (int b = 0; b < B; ++b) {
    fill[static_cast<std::size_t>(b) * V + kPadId] = 1;
    if (step == 0) fill[static_cast<std::size_t>(b) * V + kEosId] = 1;
  }
  return masked_fill(logits, fill, -std::numeric_limits<T>::infinity());
}

template <class T>
std::vector<ActionSample> PolicyModel<T>::sample_actions(const std::vector<TokenSeq>& states,
                                                         bool greedy, double temperature,
                                                         Rng& rng) const {
  if (temperature <= 0) throw std::invalid_argument("sample_actions: temperature must be > 0");
  NoGrad ng;
  const int B = static_cast<int>(states.size());
  const int V = vocab_size();
  auto enc = encode(states);
  auto st = initial_state(enc);

  std::vector<ActionSample> samples(B);
  std::vector<std::uint8_t> done(B, 0);
  std::vector<int> prev(B, kSosId);
  std::vector<double> probs(V);

  for (int t = 0; t < cfg_.max_len; ++t) {
    if (std::all_of(done.begin(), done.end(), [](std::uint8_t d) { return d != 0; })) break;
    auto step = decode_step(prev, st, enc);
    auto masked = dist_masked(step.logits, t);
    auto logits = masked.data();
    for (int b = 0; b < B; ++b) {
      if (done[b]) {
        prev[b] = kPadId;
        continue;
      }
      const T* row = logits.data() + static_cast<std::size_t>(b) * V;
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < V; ++j) mx = std::max(mx, static_cast<double>(row[j]) / temperature);
      double z = 0;
      for (int j = 0; j < V; ++j) {
        const double l = static_cast<double>(row[j]) / temperature;
        probs[j] = std::exp(l - mx);
        z += probs[j];
      }
      int tok;
      if (greedy) {
        tok = 0;
        double best = -1;
        for (int j = 0; j < V; ++j)
          if (probs[j] > best) {
            best = probs[j];
            tok = j;
          }
      } else {
        const double u = rng.uniform() * z;
        double acc = 0;
        tok = V - 1;
        for (int j = 0; j < V; ++j) {
          acc += probs[j];
          if (u < acc) {
            tok = j;
            break;
          }
        }
        while (probs[tok] == 0.0 && tok > 0) --tok;  // never pick a masked token
      }
      samples[b].log_prob += std::log(probs[tok] / z);
      if (tok == kEosId) {
        done[b] = 1;
        prev[b] = kPadId;
      } else {
        samples[b].tokens.push_back(tok);
        prev[b] = tok;
        if (samples[b].tokens.size() == static_cast<std::size_t>(cfg_.max_len)) done[b] = 1;
      }
    }
  }
  return samples;
}

template <class T>
ActionSample PolicyModel<T>::sample_action(const TokenSeq& state, bool greedy, double temperature,
                                           Rng& rng) const {
  return sample_actions({state}, greedy, temperature, rng)[0];
}

template <class T>
typename PolicyModel<T>::TeacherForced PolicyModel<T>::action_log_probs(
    const std::vector<TokenSeq>& states, const std::vector<TokenSeq>& actions) const {
  if (states.size() != actions.size())
    throw std::invalid_argument("action_log_probs: state/action batch mismatch");
  const int B = static_cast<int>(states.size());
  const int V = vocab_size();
  std::size_t steps = 0;
  for (const auto& a : actions) {
    if (a.empty()) throw std::invalid_argument("action_log_probs: empty action");
    if (a.size() > static_cast<std::size_t>(cfg_.max_len))
      throw std::invalid_argument("action_log_probs: action longer than max_len");
    for (int id : a)
      if (id < 0 || id >= V) throw std::invalid_argument("action_log_probs: token id out of range");
    steps = std::max(steps, target_count(a, cfg_.max_len));
  }

  auto enc = encode(states);
  auto st = initial_state(enc);

  Tensor<T> total;
  Tensor<T> entropy_sum;
  std::size_t active_total = 0;
  std::vector<int> prev(B, kSosId);
  for (std::size_t t = 0; t < steps; ++t) {
    auto step = decode_step(prev, st, enc);
    auto masked = dist_masked(step.logits, static_cast<int>(t));

    std::vector<int> targets(B, kPadId);
    std::vector<std::uint8_t> active(B, 0);
    std::vector<T> active_w(B, T(0));
    for (int b = 0; b < B; ++b) {
      const auto& a = actions[b];
      if (t < a.size()) {
        targets[b] = a[t];
        active[b] = 1;
      } else if (t == a.size() && a.size() < static_cast<std::size_t>(cfg_.max_len)) {
        targets[b] = kEosId;
        active[b] = 1;
      }
      if (active[b]) {
        active_w[b] = T(1);
        ++active_total;
      }
    }
    auto picked = log_softmax_pick(masked, targets, active);
    total = t == 0 ? picked : add(total, picked);

    auto ent = mul(entropy_rows(masked), Tensor<T>::from({B, 1}, active_w));
    entropy_sum = t == 0 ? sum(ent) : add(entropy_sum, sum(ent));

    for (int b = 0; b < B; ++b)
      prev[b] = t < actions[b].size() ? actions[b][t] : kPadId;
  }
  TeacherForced out;
  out.log_probs = total;
  out.mean_entropy = mul_scalar(entropy_sum, T(1) / static_cast<T>(active_total));
  return out;
}

template <class T>
typename PolicyModel<T>::BcBatch PolicyModel<T>::bc_loss(const std::vector<TokenSeq>& states,
                                                         const std::vector<TokenSeq>& actions) const {
  if (states.empty()) throw std::invalid_argument("bc_loss: empty batch");
  if (states.size() != actions.size())
    throw std::invalid_argument("bc_loss: state/action batch mismatch");
  const int B = static_cast<int>(states.size());
  const int V = vocab_size();
  const int dim = embedding_.cols();
  std::size_t steps = 0;
  for (const auto& a : actions) {
    if (a.empty()) throw std::invalid_argument("bc_loss: empty action");
    steps = std::max(steps, target_count(a, cfg_.max_len));
  }

  auto enc = encode(states);
  auto st = initial_state(enc);

  Tensor<T> picked_sum;
  std::size_t active_total = 0;
  double cos_sum = 0.0;
  std::size_t cos_count = 0;
  std::vector<int> prev(B, kSosId);
  auto emb_data = embedding_.data();

  for (std::size_t t = 0; t < steps; ++t) {
    auto step = decode_step(prev, st, enc);
    auto masked = dist_masked(step.logits, static_cast<int>(t));

    std::vector<int> targets(B, kPadId);
    std::vector<std::uint8_t> active(B, 0);
    for (int b = 0; b < B; ++b) {
      const auto& a = actions[b];
      if (t < a.size()) {
        targets[b] = a[t];
        active[b] = 1;
      } else if (t == a.size() && a.size() < static_cast<std::size_t>(cfg_.max_len)) {
        targets[b] = kEosId;
        active[b] = 1;
      }
      if (active[b]) ++active_total;
    }
    auto picked = log_softmax_pick(masked, targets, active);
    picked_sum = t == 0 ? sum(picked) : add(picked_sum, sum(picked));

    // metric: cosine between the greedy token's embedding and the target's
    auto logit_data = masked.data();
    for (int b = 0; b < B; ++b) {
      if (!active[b]) continue;
      const T* row = logit_data.data() + static_cast<std::size_t>(b) * V;
      int best = 0;
      T bestv = -std::numeric_limits<T>::infinity();
      for (int j = 0; j < V; ++j)
        if (row[j] > bestv) {
          bestv = row[j];
          best = j;
        }
      const T* ga = emb_data.data() + static_cast<std::size_t>(best) * dim;
      const T* gb = emb_data.data() + static_cast<std::size_t>(targets[b]) * dim;
      const double na = std::sqrt(static_cast<double>(kern::dot(ga, ga, dim)));
      const double nb = std::sqrt(static_cast<double>(kern::dot(gb, gb, dim)));
      if (na > 0 && nb > 0) {
        cos_sum += static_cast<double>(kern::dot(ga, gb, dim)) / (na * nb);
        ++cos_count;
      }
    }
    for (int b = 0; b < B; ++b)
      prev[b] = t < actions[b].size() ? actions[b][t] : kPadId;
  }

  BcBatch out;
  out.ce = mul_scalar(picked_sum, T(-1) / static_cast<T>(active_total));
  out.cosine = cos_count ? cos_sum / static_cast<double>(cos_count) : 0.0;
  return out;
}

template class PolicyModel<float>;
template class PolicyModel<double>;

}  // namespace gailchat
