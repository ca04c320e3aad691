#include "gailchat/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "gailchat/kernels.hpp"

namespace gailchat {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

namespace {

thread_local bool g_grad_enabled = true;

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape " + shape_str(s));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

[[noreturn]] void shape_error(const std::string& op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }
NoGrad::NoGrad() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGrad::~NoGrad() { g_grad_enabled = prev_; }

namespace {

template <class T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

template <class T>
NodePtr<T> make_node(Shape shape) {
  auto n = std::make_shared<detail::Node<T>>();
  n->shape = std::move(shape);
  n->data.assign(shape_numel(n->shape), T(0));
  return n;
}

// Wires parents + backward onto a fresh result node when recording is on and
// some parent participates in the graph.
template <class T, class... Parents>
void wire(NodePtr<T>& out, std::function<void(detail::Node<T>&)> backward, const Parents&... parents) {
  const bool any = (parents->requires_grad || ...);
  if (!g_grad_enabled || !any) return;
  out->requires_grad = true;
  (out->parents.push_back(parents), ...);
  out->backward = std::move(backward);
}

}  // namespace

// ---- Tensor basics ------------------------------------------------------------

template <class T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  auto n = make_node<T>(std::move(shape));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

template <class T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  auto n = make_node<T>(std::move(shape));
  std::fill(n->data.begin(), n->data.end(), value);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

template <class T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> data, bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw std::invalid_argument("Tensor::from: data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_str(shape));
  auto n = std::make_shared<detail::Node<T>>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

template <class T>
Tensor<T> Tensor<T>::scalar(T value) {
  return from({1}, {value});
}

template <class T>
T Tensor<T>::item() const {
  if (numel() != 1)
    throw std::invalid_argument("item(): tensor has shape " + shape_str(shape()));
  return n_->data[0];
}

template <class T>
void Tensor<T>::backward() {
  if (numel() != 1)
    throw std::invalid_argument("backward(): loss must be scalar, got shape " + shape_str(shape()));
  if (!n_->requires_grad) return;

  // post-order DFS for a topological order
  std::vector<detail::Node<T>*> order;
  std::unordered_set<detail::Node<T>*> seen;
  std::vector<std::pair<detail::Node<T>*, std::size_t>> stack{{n_.get(), 0}};
  seen.insert(n_.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      detail::Node<T>* p = node->parents[idx++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // intermediates restart from zero each pass; leaves accumulate
  for (auto* node : order) {
    if (!node->is_leaf()) {
      node->ensure_grad();
      std::fill(node->grad.begin(), node->grad.end(), T(0));
    }
  }
  n_->ensure_grad();
  n_->grad[0] += T(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward) (*it)->backward(**it);
}

// ---- ops ------------------------------------------------------------------------

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  auto an = a.node(), bn = b.node();
  auto out = make_node<T>(an->shape);
  kern::add(an->data.data(), bn->data.data(), out->data.data(), out->numel());
  wire<T>(out, [an, bn](detail::Node<T>& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      kern::axpy(T(1), o.grad.data(), an->grad.data(), o.numel());
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kern::axpy(T(1), o.grad.data(), bn->grad.data(), o.numel());
    }
  }, an, bn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> add_bias(const Tensor<T>& m, const Tensor<T>& bias) {
  if (m.shape().size() != 2 || bias.shape().size() != 1 || m.cols() != bias.shape()[0])
    shape_error("add_bias", m.shape(), bias.shape());
  auto mn = m.node(), bn = bias.node();
  const std::size_t rows = mn->shape[0], cols = mn->shape[1];
  auto out = make_node<T>(mn->shape);
  for (std::size_t r = 0; r < rows; ++r)
    kern::add(mn->data.data() + r * cols, bn->data.data(), out->data.data() + r * cols, cols);
  wire<T>(out, [mn, bn, rows, cols](detail::Node<T>& o) {
    if (mn->requires_grad) {
      mn->ensure_grad();
      kern::axpy(T(1), o.grad.data(), mn->grad.data(), o.numel());
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        kern::axpy(T(1), o.grad.data() + r * cols, bn->grad.data(), cols);
    }
  }, mn, bn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape());
  auto an = a.node(), bn = b.node();
  auto out = make_node<T>(an->shape);
  kern::sub(an->data.data(), bn->data.data(), out->data.data(), out->numel());
  wire<T>(out, [an, bn](detail::Node<T>& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      kern::axpy(T(1), o.grad.data(), an->grad.data(), o.numel());
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kern::axpy(T(-1), o.grad.data(), bn->grad.data(), o.numel());
    }
  }, an, bn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  auto an = a.node(), bn = b.node();
  auto out = make_node<T>(an->shape);
  kern::mul(an->data.data(), bn->data.data(), out->data.data(), out->numel());
  wire<T>(out, [an, bn](detail::Node<T>& o) {
    const std::size_t n = o.numel();
    std::vector<T> tmp(n);
    if (an->requires_grad) {
      an->ensure_grad();
      kern::mul(o.grad.data(), bn->data.data(), tmp.data(), n);
      kern::axpy(T(1), tmp.data(), an->grad.data(), n);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kern::mul(o.grad.data(), an->data.data(), tmp.data(), n);
      kern::axpy(T(1), tmp.data(), bn->grad.data(), n);
    }
  }, an, bn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> mul_scalar(const Tensor<T>& a, T c) {
  auto an = a.node();
  auto out = make_node<T>(an->shape);
  kern::scale(an->data.data(), c, out->data.data(), out->numel());
  wire<T>(out, [an, c](detail::Node<T>& o) {
    an->ensure_grad();
    kern::axpy(c, o.grad.data(), an->grad.data(), o.numel());
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows())
    shape_error("matmul", a.shape(), b.shape());
  auto an = a.node(), bn = b.node();
  const std::size_t m = an->shape[0], k = an->shape[1], n = bn->shape[1];
  auto out = make_node<T>(Shape{static_cast<int>(m), static_cast<int>(n)});
  kern::gemm_nn(m, n, k, an->data.data(), bn->data.data(), out->data.data(), false);
  wire<T>(out, [an, bn, m, k, n](detail::Node<T>& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      kern::gemm_nt(m, k, n, o.grad.data(), bn->data.data(), an->grad.data(), true);
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      kern::gemm_tn(k, n, m, an->data.data(), o.grad.data(), bn->grad.data(), true);
    }
  }, an, bn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  if (x.shape().size() != 2 || w.shape().size() != 2 || x.cols() != w.cols())
    shape_error("linear", x.shape(), w.shape());
  const bool has_bias = bias.defined();
  if (has_bias && (bias.shape().size() != 1 || bias.shape()[0] != w.rows()))
    shape_error("linear bias", w.shape(), bias.shape());
  auto xn = x.node(), wn = w.node();
  auto bn = has_bias ? bias.node() : nullptr;
  const std::size_t b = xn->shape[0], in = xn->shape[1], outw = wn->shape[0];
  auto out = make_node<T>(Shape{static_cast<int>(b), static_cast<int>(outw)});
  kern::gemm_nt(b, outw, in, xn->data.data(), wn->data.data(), out->data.data(), false);
  if (has_bias)
    for (std::size_t r = 0; r < b; ++r)
      kern::add(out->data.data() + r * outw, bn->data.data(), out->data.data() + r * outw, outw);

  auto backward = [xn, wn, bn, b, in, outw](detail::Node<T>& o) {
    if (xn->requires_grad) {
      xn->ensure_grad();
      kern::gemm_nn(b, in, outw, o.grad.data(), wn->data.data(), xn->grad.data(), true);
    }
    if (wn->requires_grad) {
      wn->ensure_grad();
      kern::gemm_tn(outw, in, b, o.grad.data(), xn->data.data(), wn->grad.data(), true);
    }
    if (bn && bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t r = 0; r < b; ++r)
        kern::axpy(T(1), o.grad.data() + r * outw, bn->grad.data(), outw);
    }
  };
  if (has_bias)
    wire<T>(out, backward, xn, wn, bn);
  else
    wire<T>(out, backward, xn, wn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  auto an = a.node();
  auto out = make_node<T>(an->shape);
  kern::sigmoid_v(an->data.data(), out->data.data(), out->numel());
  auto on = out;
  wire<T>(out, [an, on](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t i = 0; i < o.numel(); ++i) {
      const T s = on->data[i];
      an->grad[i] += o.grad[i] * s * (T(1) - s);
    }
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> tanh_t(const Tensor<T>& a) {
  auto an = a.node();
  auto out = make_node<T>(an->shape);
  kern::tanh_v(an->data.data(), out->data.data(), out->numel());
  auto on = out;
  wire<T>(out, [an, on](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t i = 0; i < o.numel(); ++i) {
      const T t = on->data[i];
      an->grad[i] += o.grad[i] * (T(1) - t * t);
    }
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const int rows = parts[0].rows();
  int total = 0;
  for (const auto& p : parts) {
    if (p.shape().size() != 2 || p.rows() != rows)
      shape_error("concat_cols", parts[0].shape(), p.shape());
    total += p.cols();
  }
  auto out = make_node<T>(Shape{rows, total});
  std::vector<NodePtr<T>> ns;
  bool any = false;
  for (const auto& p : parts) {
    ns.push_back(p.node());
    any = any || p.requires_grad();
  }
  std::size_t off = 0;
  for (const auto& n : ns) {
    const std::size_t c = n->shape[1];
    for (int r = 0; r < rows; ++r)
      std::copy_n(n->data.data() + r * c, c, out->data.data() + r * total + off);
    off += c;
  }
  if (g_grad_enabled && any) {
    out->requires_grad = true;
    out->parents.assign(ns.begin(), ns.end());
    out->backward = [ns, rows, total](detail::Node<T>& o) {
      std::size_t off2 = 0;
      for (const auto& n : ns) {
        const std::size_t c = n->shape[1];
        if (n->requires_grad) {
          n->ensure_grad();
          for (int r = 0; r < rows; ++r)
            kern::axpy(T(1), o.grad.data() + r * total + off2, n->grad.data() + r * c, c);
        }
        off2 += c;
      }
    };
  }
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> softmax_rows(const Tensor<T>& a) {
  if (a.shape().size() != 2) throw std::invalid_argument("softmax_rows: need rank 2, got " + shape_str(a.shape()));
  auto an = a.node();
  const std::size_t rows = an->shape[0], cols = an->shape[1];
  auto out = make_node<T>(an->shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = an->data.data() + r * cols;
    T* y = out->data.data() + r * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, x[j]);
    if (!(mx > -std::numeric_limits<T>::infinity()))
      throw std::invalid_argument("softmax_rows: row " + std::to_string(r) + " fully masked");
    T s = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      s += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= s;
  }
  auto on = out;
  wire<T>(out, [an, on, rows, cols](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const T* p = on->data.data() + r * cols;
      const T* g = o.grad.data() + r * cols;
      const T gp = kern::dot(g, p, cols);
      T* ag = an->grad.data() + r * cols;
      for (std::size_t j = 0; j < cols; ++j) ag[j] += p[j] * (g[j] - gp);
    }
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> masked_fill(const Tensor<T>& a, const std::vector<std::uint8_t>& fill, T value) {
  auto an = a.node();
  if (fill.size() != an->numel())
    throw std::invalid_argument("masked_fill: mask length " + std::to_string(fill.size()) +
                                " vs tensor " + shape_str(an->shape));
  auto out = make_node<T>(an->shape);
  for (std::size_t i = 0; i < an->numel(); ++i) out->data[i] = fill[i] ? value : an->data[i];
  wire<T>(out, [an, fill](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t i = 0; i < o.numel(); ++i)
      if (!fill[i]) an->grad[i] += o.grad[i];
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> slice_cols(const Tensor<T>& a, int lo, int len) {
  if (a.shape().size() != 2 || lo < 0 || len < 0 || lo + len > a.cols())
    throw std::invalid_argument("slice_cols: [" + std::to_string(lo) + "," +
                                std::to_string(lo + len) + ") out of " + shape_str(a.shape()));
  auto an = a.node();
  const std::size_t rows = an->shape[0], cols = an->shape[1];
  auto out = make_node<T>(Shape{static_cast<int>(rows), len});
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(an->data.data() + r * cols + lo, len, out->data.data() + r * len);
  wire<T>(out, [an, lo, len, rows, cols](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r)
      kern::axpy(T(1), o.grad.data() + r * len, an->grad.data() + r * cols + lo,
                 static_cast<std::size_t>(len));
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> softplus(const Tensor<T>& a) {
  auto an = a.node();
  auto out = make_node<T>(an->shape);
  for (std::size_t i = 0; i < an->numel(); ++i) {
    const T x = an->data[i];
    out->data[i] = std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x)));
  }
  wire<T>(out, [an](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t i = 0; i < o.numel(); ++i)
      an->grad[i] += o.grad[i] / (T(1) + std::exp(-an->data[i]));
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> row_sum(const Tensor<T>& a) {
  if (a.shape().size() != 2) throw std::invalid_argument("row_sum: need rank 2, got " + shape_str(a.shape()));
  auto an = a.node();
  const std::size_t rows = an->shape[0], cols = an->shape[1];
  auto out = make_node<T>(Shape{static_cast<int>(rows), 1});
  for (std::size_t r = 0; r < rows; ++r)
    out->data[r] = kern::sum(an->data.data() + r * cols, cols);
  wire<T>(out, [an, rows, cols](detail::Node<T>& o) {
    an->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const T g = o.grad[r];
      T* ag = an->grad.data() + r * cols;
      for (std::size_t j = 0; j < cols; ++j) ag[j] += g;
    }
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> scale_rows(const Tensor<T>& a, const Tensor<T>& s) {
  if (a.shape().size() != 2 || s.shape().size() != 2 || s.cols() != 1 || s.rows() != a.rows())
    shape_error("scale_rows", a.shape(), s.shape());
  auto an = a.node(), sn = s.node();
  const std::size_t rows = an->shape[0], cols = an->shape[1];
  auto out = make_node<T>(an->shape);
  for (std::size_t r = 0; r < rows; ++r)
    kern::scale(an->data.data() + r * cols, sn->data[r], out->data.data() + r * cols, cols);
  wire<T>(out, [an, sn, rows, cols](detail::Node<T>& o) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        kern::axpy(sn->data[r], o.grad.data() + r * cols, an->grad.data() + r * cols, cols);
    }
    if (sn->requires_grad) {
      sn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        sn->grad[r] += kern::dot(o.grad.data() + r * cols, an->data.data() + r * cols, cols);
    }
  }, an, sn);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<int>& ids) {
  if (table.shape().size() != 2) throw std::invalid_argument("gather_rows: table must be rank 2");
  auto tn = table.node();
  const int v = tn->shape[0];
  const std::size_t cols = tn->shape[1];
  for (int id : ids)
    if (id < 0 || id >= v)
      throw std::invalid_argument("gather_rows: id " + std::to_string(id) + " out of range [0," +
                                  std::to_string(v) + ")");
  auto out = make_node<T>(Shape{static_cast<int>(ids.size()), static_cast<int>(cols)});
  for (std::size_t b = 0; b < ids.size(); ++b)
    std::copy_n(tn->data.data() + static_cast<std::size_t>(ids[b]) * cols, cols,
                out->data.data() + b * cols);
  wire<T>(out, [tn, ids, cols](detail::Node<T>& o) {
    tn->ensure_grad();
    for (std::size_t b = 0; b < ids.size(); ++b)
      kern::axpy(T(1), o.grad.data() + b * cols,
                 tn->grad.data() + static_cast<std::size_t>(ids[b]) * cols, cols);
  }, tn);
  return Tensor<T>::wrap(out);
}

namespace {
// shared picked-log-softmax forward; fills probs (B*V) and picked (B)
template <class T>
void picked_log_softmax(const detail::Node<T>& logits, const std::vector<int>& targets,
                        const std::vector<std::uint8_t>& active, std::vector<T>& probs,
                        std::vector<T>& picked) {
  const std::size_t rows = logits.shape[0], cols = logits.shape[1];
  probs.assign(rows * cols, T(0));
  picked.assign(rows, T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!active[r]) continue;
    const T* x = logits.data.data() + r * cols;
    T* p = probs.data() + r * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, x[j]);
    T s = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      p[j] = std::exp(x[j] - mx);
      s += p[j];
    }
    const T logs = std::log(s);
    for (std::size_t j = 0; j < cols; ++j) p[j] /= s;
    picked[r] = x[targets[r]] - mx - logs;
  }
}
}  // namespace

template <class T>
Tensor<T> log_softmax_pick(const Tensor<T>& logits, const std::vector<int>& targets,
                           const std::vector<std::uint8_t>& active) {
  if (logits.shape().size() != 2) throw std::invalid_argument("log_softmax_pick: need rank 2 logits");
  auto ln = logits.node();
  const std::size_t rows = ln->shape[0], cols = ln->shape[1];
  if (targets.size() != rows || active.size() != rows)
    throw std::invalid_argument("log_softmax_pick: targets/mask length mismatch with batch " +
                                std::to_string(rows));
  for (std::size_t r = 0; r < rows; ++r)
    if (active[r] && (targets[r] < 0 || targets[r] >= static_cast<int>(cols)))
      throw std::invalid_argument("log_softmax_pick: target id " + std::to_string(targets[r]) +
                                  " out of range");
  auto out = make_node<T>(Shape{static_cast<int>(rows), 1});
  auto probs = std::make_shared<std::vector<T>>();
  std::vector<T> picked;
  picked_log_softmax(*ln, targets, active, *probs, picked);
  std::copy(picked.begin(), picked.end(), out->data.begin());
  wire<T>(out, [ln, targets, active, probs, rows, cols](detail::Node<T>& o) {
    ln->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      if (!active[r]) continue;
      const T g = o.grad[r];
      const T* p = probs->data() + r * cols;
      T* lg = ln->grad.data() + r * cols;
      for (std::size_t j = 0; j < cols; ++j) lg[j] -= g * p[j];
      lg[targets[r]] += g;
    }
  }, ln);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> entropy_rows(const Tensor<T>& logits) {
  if (logits.shape().size() != 2) throw std::invalid_argument("entropy_rows: need rank 2 logits");
  auto ln = logits.node();
  const std::size_t rows = ln->shape[0], cols = ln->shape[1];
  auto out = make_node<T>(Shape{static_cast<int>(rows), 1});
  auto probs = std::make_shared<std::vector<T>>(rows * cols, T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = ln->data.data() + r * cols;
    T* p = probs->data() + r * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < cols; ++j) mx = std::max(mx, x[j]);
    if (!(mx > -std::numeric_limits<T>::infinity()))
      throw std::invalid_argument("entropy_rows: row fully masked");
    T s = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      p[j] = std::exp(x[j] - mx);
      s += p[j];
    }
    T ent = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      p[j] /= s;
      if (p[j] > T(0)) ent -= p[j] * std::log(p[j]);
    }
    out->data[r] = ent;
  }
  auto on = out;
  wire<T>(out, [ln, on, probs, rows, cols](detail::Node<T>& o) {
    ln->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const T g = o.grad[r];
      const T ent = on->data[r];
      const T* p = probs->data() + r * cols;
      T* lg = ln->grad.data() + r * cols;
      for (std::size_t j = 0; j < cols; ++j)
        if (p[j] > T(0)) lg[j] -= g * p[j] * (std::log(p[j]) + ent);
    }
  }, ln);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> sum(const Tensor<T>& a) {
  auto an = a.node();
  auto out = make_node<T>(Shape{1});
  out->data[0] = kern::sum(an->data.data(), an->numel());
  wire<T>(out, [an](detail::Node<T>& o) {
    an->ensure_grad();
    const T g = o.grad[0];
    for (std::size_t i = 0; i < an->numel(); ++i) an->grad[i] += g;
  }, an);
  return Tensor<T>::wrap(out);
}

template <class T>
Tensor<T> mean(const Tensor<T>& a) {
  if (a.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  return mul_scalar(sum(a), T(1) / static_cast<T>(a.numel()));
}

template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets,
                        const std::vector<std::uint8_t>& active) {
  std::size_t n_active = 0;
  for (auto m : active) n_active += m ? 1 : 0;
  if (n_active == 0) throw std::invalid_argument("cross_entropy: all positions masked");
  auto picked = log_softmax_pick(logits, targets, active);
  return mul_scalar(sum(picked), T(-1) / static_cast<T>(n_active));
}

// ---- explicit instantiations -------------------------------------------------

#define GAILCHAT_INSTANTIATE(T)                                                                      \
  template class Tensor<T>;                                                                          \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> mul_scalar(const Tensor<T>&, T);                                                \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                     \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                      \
  template Tensor<T> tanh_t(const Tensor<T>&);                                                       \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                                     \
  template Tensor<T> softmax_rows(const Tensor<T>&);                                                 \
  template Tensor<T> masked_fill(const Tensor<T>&, const std::vector<std::uint8_t>&, T);             \
  template Tensor<T> slice_cols(const Tensor<T>&, int, int);                                         \
  template Tensor<T> softplus(const Tensor<T>&);                                                     \
  template Tensor<T> row_sum(const Tensor<T>&);                                                      \
  template Tensor<T> scale_rows(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> gather_rows(const Tensor<T>&, const std::vector<int>&);                         \
  template Tensor<T> log_softmax_pick(const Tensor<T>&, const std::vector<int>&,                     \
                                      const std::vector<std::uint8_t>&);                             \
  template Tensor<T> entropy_rows(const Tensor<T>&);                                                 \
  template Tensor<T> sum(const Tensor<T>&);                                                          \
  template Tensor<T> mean(const Tensor<T>&);                                                         \
  template Tensor<T> cross_entropy(const Tensor<T>&, const std::vector<int>&,                        \
                                   const std::vector<std::uint8_t>&);

GAILCHAT_INSTANTIATE(float)
GAILCHAT_INSTANTIATE(double)
#undef GAILCHAT_INSTANTIATE

}  // namespace gailchat
