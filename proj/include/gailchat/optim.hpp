#pragma once

// Named parameter collections and the Adam optimizer.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gailchat/tensor.hpp"

namespace gailchat {

template <class T>
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
  };

  // Registers a trainable tensor under a unique name and returns it.
  Tensor<T> add(const std::string& name, Tensor<T> t);
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t total_values() const;

  void zero_grad();

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <class T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

// Standard Adam with bias correction. step() consumes and zeroes gradients.
template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig<T> cfg = {}) : cfg_(cfg) {}

  void step(ParamSet<T>& params);
  std::int64_t step_count() const { return t_; }
  const AdamConfig<T>& config() const { return cfg_; }

 private:
  struct Slot {
    std::vector<T> m, v;
  };
  AdamConfig<T> cfg_;
  std::int64_t t_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace gailchat
