#pragma once

// Small define-by-run autodiff core over dense row-major tensors. The graph
// is rebuilt every step (simplest correct scheme for unrolled RNNs); reverse
// mode accumulates gradients into leaf tensors. All dense arithmetic goes
// through the kernels layer.
//
// Instantiated for float (training) and double (gradient checks).

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gailchat {

using Shape = std::vector<int>;
std::string shape_str(const Shape& s);

namespace detail {
template <class T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // same length as data once allocated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::size_t numel() const { return data.size(); }
  bool is_leaf() const { return parents.empty(); }
  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
  }
};
}  // namespace detail

// Graph recording can be suspended for inference/sampling paths.
bool grad_enabled();
class NoGrad {
 public:
  NoGrad();
  ~NoGrad();
  NoGrad(const NoGrad&) = delete;
  NoGrad& operator=(const NoGrad&) = delete;

 private:
  bool prev_;
};

template <class T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false);
  static Tensor scalar(T value);

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  std::size_t numel() const { return n_->numel(); }
  int rows() const { return n_->shape.at(0); }
  int cols() const { return n_->shape.at(1); }

  std::span<T> data() { return {n_->data.data(), n_->data.size()}; }
  std::span<const T> data() const { return {n_->data.data(), n_->data.size()}; }

  bool requires_grad() const { return n_->requires_grad; }
  bool has_grad() const { return !n_->grad.empty(); }
  std::span<T> grad() {
    n_->ensure_grad();
    return {n_->grad.data(), n_->grad.size()};
  }
  void zero_grad() {
    if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), T(0));
  }

  T item() const;
  T at(int r, int c) const { return n_->data[static_cast<std::size_t>(r) * cols() + c]; }

  // Reverse pass from a scalar. Leaf gradients accumulate across calls;
  // intermediate gradients are reset each call.
  void backward();

  std::shared_ptr<detail::Node<T>> node() const { return n_; }
  static Tensor wrap(std::shared_ptr<detail::Node<T>> n) { return Tensor(std::move(n)); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node<T>> n) : n_(std::move(n)) {}
  std::shared_ptr<detail::Node<T>> n_;
};

// ---- ops --------------------------------------------------------------------
// Mask conventions:
//   masked_fill takes `fill` bytes, 1 = replace that element with `value`;
//   log_softmax_pick / cross_entropy take `active` bytes, 1 = row counts.

template <class T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> add_bias(const Tensor<T>& m, const Tensor<T>& bias);
template <class T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <class T> Tensor<T> mul_scalar(const Tensor<T>& a, T c);
template <class T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
// x {B,In} * w {Out,In}^T + bias {Out}; bias may be undefined
template <class T> Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias);
template <class T> Tensor<T> sigmoid(const Tensor<T>& a);
template <class T> Tensor<T> tanh_t(const Tensor<T>& a);
template <class T> Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);
template <class T> Tensor<T> softmax_rows(const Tensor<T>& a);
template <class T> Tensor<T> masked_fill(const Tensor<T>& a, const std::vector<std::uint8_t>& fill, T value);
template <class T> Tensor<T> slice_cols(const Tensor<T>& a, int lo, int len);  // {B,N} -> {B,len}
template <class T> Tensor<T> softplus(const Tensor<T>& a);                     // log(1 + e^x), stable
template <class T> Tensor<T> row_sum(const Tensor<T>& a);                      // {B,D} -> {B,1}
template <class T> Tensor<T> scale_rows(const Tensor<T>& a, const Tensor<T>& s);  // {B,D} x {B,1}
template <class T> Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<int>& ids);
template <class T> Tensor<T> log_softmax_pick(const Tensor<T>& logits, const std::vector<int>& targets,
                                              const std::vector<std::uint8_t>& active);  // -> {B,1}
template <class T> Tensor<T> entropy_rows(const Tensor<T>& logits);            // {B,V} -> {B,1}
template <class T> Tensor<T> sum(const Tensor<T>& a);   // -> scalar
template <class T> Tensor<T> mean(const Tensor<T>& a);  // -> scalar
// mean over active rows of -log softmax(logits)[target]; throws if none active
template <class T> Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets,
                                           const std::vector<std::uint8_t>& active);

}  // namespace gailchat
