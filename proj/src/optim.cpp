#include "gailchat/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "gailchat/kernels.hpp"

namespace gailchat {

template <class T>
Tensor<T> ParamSet<T>::add(const std::string& name, Tensor<T> t) {
  if (index_.count(name)) throw std::invalid_argument("ParamSet: duplicate parameter " + name);
  if (!t.requires_grad()) throw std::invalid_argument("ParamSet: parameter " + name + " must require grad");
  index_[name] = entries_.size();
  entries_.push_back({name, t});
  return t;
}

template <class T>
Tensor<T>& ParamSet<T>::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamSet: no parameter named " + name);
  return entries_[it->second].tensor;
}

template <class T>
const Tensor<T>& ParamSet<T>::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("ParamSet: no parameter named " + name);
  return entries_[it->second].tensor;
}

template <class T>
std::size_t ParamSet<T>::total_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <class T>
void ParamSet<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template <class T>
void Adam<T>::step(ParamSet<T>& params) {
  if (slots_.empty()) {
    slots_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::size_t n = params.entries()[i].tensor.numel();
      slots_[i].m.assign(n, T(0));
      slots_[i].v.assign(n, T(0));
    }
  }
  if (slots_.size() != params.size())
    throw std::invalid_argument("Adam: parameter set changed size under the optimizer");

  for (const auto& e : params.entries())
    if (!e.tensor.has_grad())
      throw std::invalid_argument("Adam: parameter " + e.name + " has no gradient");

  ++t_;
  const T bc1 = T(1) / (T(1) - std::pow(cfg_.beta1, static_cast<T>(t_)));
  const T bc2 = T(1) / (T(1) - std::pow(cfg_.beta2, static_cast<T>(t_)));

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& e = const_cast<typename ParamSet<T>::Entry&>(params.entries()[i]);
    auto p = e.tensor.data();
    auto g = e.tensor.grad();
    kern::adam_update(p.data(), slots_[i].m.data(), slots_[i].v.data(), g.data(), p.size(),
                      cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps, bc1, bc2);
  }
  params.zero_grad();
}

template class ParamSet<float>;
template class ParamSet<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace gailchat
