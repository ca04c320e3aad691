#include "gailchat/gru.hpp"

#include <cmath>

namespace gailchat {

template <class T>
Tensor<T> xavier_init(int rows, int cols, Rng& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  std::vector<T> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = static_cast<T>(rng.uniform(-a, a));
  return Tensor<T>::from({rows, cols}, std::move(data), true);
}

template Tensor<float> xavier_init(int, int, Rng&);
template Tensor<double> xavier_init(int, int, Rng&);

template <class T>
GruLayer<T> GruLayer<T>::create(int input, int hidden, ParamSet<T>& params,
                                const std::string& prefix, Rng& rng) {
  GruLayer layer;
  auto gate = [&](const std::string& g, Tensor<T>& w, Tensor<T>& u, Tensor<T>& b) {
    w = params.add(prefix + ".w_" + g, xavier_init<T>(hidden, input, rng));
    u = params.add(prefix + ".u_" + g, xavier_init<T>(hidden, hidden, rng));
    b = params.add(prefix + ".b_" + g, Tensor<T>::zeros({hidden}, true));
  };
  gate("z", layer.w_z, layer.u_z, layer.b_z);
  gate("r", layer.w_r, layer.u_r, layer.b_r);
  gate("n", layer.w_n, layer.u_n, layer.b_n);
  return layer;
}

template <class T>
GruLayer<T> GruLayer<T>::from_params(ParamSet<T>& params, const std::string& prefix) {
  GruLayer layer;
  layer.w_z = params.at(prefix + ".w_z");
  layer.u_z = params.at(prefix + ".u_z");
  layer.b_z = params.at(prefix + ".b_z");
  layer.w_r = params.at(prefix + ".w_r");
  layer.u_r = params.at(prefix + ".u_r");
  layer.b_r = params.at(prefix + ".b_r");
  layer.w_n = params.at(prefix + ".w_n");
  layer.u_n = params.at(prefix + ".u_n");
  layer.b_n = params.at(prefix + ".b_n");
  return layer;
}

template <class T>
Tensor<T> GruLayer<T>::step(const Tensor<T>& x, const Tensor<T>& h) const {
  Tensor<T> none;
  auto z = sigmoid(add(linear(x, w_z, b_z), linear(h, u_z, none)));
  auto r = sigmoid(add(linear(x, w_r, b_r), linear(h, u_r, none)));
  auto n = tanh_t(add(linear(x, w_n, b_n), mul(r, linear(h, u_n, none))));
  // (1-z)*n + z*h, written as n + z*(h-n)
  return add(n, mul(z, sub(h, n)));
}

template <class T>
BiGruEncoder<T> BiGruEncoder<T>::create(int input, int hidden, int layers, ParamSet<T>& params,
                                        const std::string& prefix, Rng& rng) {
  BiGruEncoder enc;
  enc.hidden_size = hidden;
  for (int l = 0; l < layers; ++l) {
    const int in = l == 0 ? input : 2 * hidden;
    enc.fwd.push_back(GruLayer<T>::create(in, hidden, params, prefix + ".fwd.l" + std::to_string(l), rng));
    enc.bwd.push_back(GruLayer<T>::create(in, hidden, params, prefix + ".bwd.l" + std::to_string(l), rng));
  }
  return enc;
}

template <class T>
BiGruEncoder<T> BiGruEncoder<T>::from_params(ParamSet<T>& params, const std::string& prefix,
                                             int layers) {
  BiGruEncoder enc;
  for (int l = 0; l < layers; ++l) {
    enc.fwd.push_back(GruLayer<T>::from_params(params, prefix + ".fwd.l" + std::to_string(l)));
    enc.bwd.push_back(GruLayer<T>::from_params(params, prefix + ".bwd.l" + std::to_string(l)));
  }
  enc.hidden_size = enc.fwd[0].hidden();
  return enc;
}

template <class T>
typename BiGruEncoder<T>::Output BiGruEncoder<T>::run(const std::vector<Tensor<T>>& inputs,
                                                      const std::vector<Tensor<T>>& step_mask) const {
  const int L = static_cast<int>(inputs.size());
  const int B = inputs[0].rows();
  const int H = hidden_size;

  Output out;
  std::vector<Tensor<T>> layer_in = inputs;
  for (std::size_t l = 0; l < fwd.size(); ++l) {
    std::vector<Tensor<T>> fwd_out(L), bwd_out(L);

    auto h = Tensor<T>::zeros({B, H});
    for (int t = 0; t < L; ++t) {
      auto h_new = fwd[l].step(layer_in[t], h);
      h = add(h, scale_rows(sub(h_new, h), step_mask[t]));  // keep h at pads
      fwd_out[t] = h;
    }
    out.final_fwd.push_back(h);

    h = Tensor<T>::zeros({B, H});
    for (int t = L - 1; t >= 0; --t) {
      auto h_new = bwd[l].step(layer_in[t], h);
      h = add(h, scale_rows(sub(h_new, h), step_mask[t]));
      bwd_out[t] = h;
    }
    out.final_bwd.push_back(h);

    std::vector<Tensor<T>> next(L);
    for (int t = 0; t < L; ++t) next[t] = concat_cols<T>({fwd_out[t], bwd_out[t]});
    layer_in = std::move(next);
  }
  out.outputs = std::move(layer_in);
  return out;
}

template struct GruLayer<float>;
template struct GruLayer<double>;
template struct BiGruEncoder<float>;
template struct BiGruEncoder<double>;

}  // namespace gailchat
