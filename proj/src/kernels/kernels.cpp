#include "gailchat/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace gailchat::kern {

// ---- scalar reference ------------------------------------------------------

namespace scalar {

template <class T>
static T dot_impl(const T* x, const T* y, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <class T>
static void axpy_impl(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
static void adam_impl(T* p, T* m, T* v, const T* g, std::size_t n,
                      T lr, T b1, T b2, T eps, T bc1, T bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

float  dot(const float* x, const float* y, std::size_t n) { return dot_impl(x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return dot_impl(x, y, n); }
void axpy(float a, const float* x, float* y, std::size_t n) { axpy_impl(a, x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { axpy_impl(a, x, y, n); }

void add(const float* x, const float* y, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}
void add(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}
void sub(const float* x, const float* y, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}
void sub(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}
void mul(const float* x, const float* y, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}
void mul(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}
void scale(const float* x, float a, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}
void scale(const double* x, double a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}
float sum(const float* x, std::size_t n) {
  float acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}
double sum(const double* x, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2) {
  adam_impl(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
  adam_impl(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}

}  // namespace scalar

// ---- dispatch ----------------------------------------------------------------

namespace {

enum class Impl { Scalar, Avx2 };

Impl pick_initial() {
  if (const char* env = std::getenv("GAILCHAT_KERNELS")) {
    std::string want(env);
    if (want == "scalar") return Impl::Scalar;
    if (want == "avx2") {
      if (!avx2::available())
        throw std::runtime_error("GAILCHAT_KERNELS=avx2 but host lacks AVX2/FMA");
      return Impl::Avx2;
    }
    throw std::runtime_error("unknown GAILCHAT_KERNELS value: " + want);
  }
  return avx2::available() ? Impl::Avx2 : Impl::Scalar;
}

Impl& current() {
  static Impl impl = pick_initial();
  return impl;
}

}  // namespace

std::string active_impl() {
  return current() == Impl::Avx2 ? "avx2" : "scalar";
}

void select_impl(const std::string& name) {
  if (name == "scalar") {
    current() = Impl::Scalar;
  } else if (name == "avx2") {
    if (!avx2::available())
      throw std::runtime_error("avx2 kernels unavailable on this host");
    current() = Impl::Avx2;
  } else {
    throw std::runtime_error("unknown kernel impl: " + name);
  }
}

#define GAILCHAT_DISPATCH(expr) \
  return current() == Impl::Avx2 ? avx2::expr : scalar::expr

float dot(const float* x, const float* y, std::size_t n) { GAILCHAT_DISPATCH(dot(x, y, n)); }
double dot(const double* x, const double* y, std::size_t n) { GAILCHAT_DISPATCH(dot(x, y, n)); }
void axpy(float a, const float* x, float* y, std::size_t n) { GAILCHAT_DISPATCH(axpy(a, x, y, n)); }
void axpy(double a, const double* x, double* y, std::size_t n) { GAILCHAT_DISPATCH(axpy(a, x, y, n)); }
void add(const float* x, const float* y, float* out, std::size_t n) { GAILCHAT_DISPATCH(add(x, y, out, n)); }
void add(const double* x, const double* y, double* out, std::size_t n) { GAILCHAT_DISPATCH(add(x, y, out, n)); }
void sub(const float* x, const float* y, float* out, std::size_t n) { GAILCHAT_DISPATCH(sub(x, y, out, n)); }
void sub(const double* x, const double* y, double* out, std::size_t n) { GAILCHAT_DISPATCH(sub(x, y, out, n)); }
void mul(const float* x, const float* y, float* out, std::size_t n) { GAILCHAT_DISPATCH(mul(x, y, out, n)); }
void mul(const double* x, const double* y, double* out, std::size_t n) { GAILCHAT_DISPATCH(mul(x, y, out, n)); }
void scale(const float* x, float a, float* out, std::size_t n) { GAILCHAT_DISPATCH(scale(x, a, out, n)); }
void scale(const double* x, double a, double* out, std::size_t n) { GAILCHAT_DISPATCH(scale(x, a, out, n)); }
float sum(const float* x, std::size_t n) { GAILCHAT_DISPATCH(sum(x, n)); }
double sum(const double* x, std::size_t n) { GAILCHAT_DISPATCH(sum(x, n)); }
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2) {
  GAILCHAT_DISPATCH(adam_update(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2));
}
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
  GAILCHAT_DISPATCH(adam_update(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2));
}

#undef GAILCHAT_DISPATCH

// ---- transcendentals ---------------------------------------------------------

template <class T>
void sigmoid_v(const T* x, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = T(1) / (T(1) + std::exp(-x[i]));
}
template <class T>
void tanh_v(const T* x, T* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}
template void sigmoid_v<float>(const float*, float*, std::size_t);
template void sigmoid_v<double>(const double*, double*, std::size_t);
template void tanh_v<float>(const float*, float*, std::size_t);
template void tanh_v<double>(const double*, double*, std::size_t);

// ---- gemm --------------------------------------------------------------------

template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const T* a, const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0;
    for (std::size_t p = 0; p < k; ++p) axpy(a[i * k + p], b + p * n, crow, n);
  }
}

template <class T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const T* a, const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      T v = dot(arow, b + j * k, k);
      crow[j] = accumulate ? crow[j] + v : v;
    }
  }
}

template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate)
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0;
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a + p * m;
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) axpy(arow[i], brow, c + i * n, n);
  }
}

template void gemm_nn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm_nn<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);
template void gemm_nt<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm_nt<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);
template void gemm_tn<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*, bool);
template void gemm_tn<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*, bool);

}  // namespace gailchat::kern
