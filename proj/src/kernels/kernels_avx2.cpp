// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; callers must check
// avx2::available() first (the dispatcher in kernels.cpp does).

#include "gailchat/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(_M_X64)
#define GAILCHAT_X86 1
#include <immintrin.h>
#else
#define GAILCHAT_X86 0
#endif

namespace gailchat::kern::avx2 {

bool available() {
#if GAILCHAT_X86 && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if GAILCHAT_X86

static inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehdup_ps(lo);
  __m128 s = _mm_add_ps(lo, sh);
  sh = _mm_movehl_ps(sh, s);
  s = _mm_add_ss(s, sh);
  return _mm_cvtss_f32(s);
}

static inline double hsum256d(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

float dot(const float* x, const float* y, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  float r = hsum256(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double r = hsum256d(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void add(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void add(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void sub(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(const float* x, float a, float* out, std::size_t n) {
  __m256 av = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void scale(const double* x, double a, double* out, std::size_t n) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

float sum(const float* x, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float r = hsum256(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum256d(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2) {
  __m256 b1v = _mm256_set1_ps(b1), one_b1 = _mm256_set1_ps(1.0f - b1);
  __m256 b2v = _mm256_set1_ps(b2), one_b2 = _mm256_set1_ps(1.0f - b2);
  __m256 lrv = _mm256_set1_ps(lr), epsv = _mm256_set1_ps(eps);
  __m256 bc1v = _mm256_set1_ps(bc1), bc2v = _mm256_set1_ps(bc2);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_fmadd_ps(one_b1, gv, _mm256_mul_ps(b1v, _mm256_loadu_ps(m + i)));
    __m256 g2 = _mm256_mul_ps(gv, gv);
    __m256 vv = _mm256_fmadd_ps(one_b2, g2, _mm256_mul_ps(b2v, _mm256_loadu_ps(v + i)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vv, bc2v)), epsv);
    __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, _mm256_mul_ps(mv, bc1v)), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0f - b1) * g[i];
    v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
  __m256d b1v = _mm256_set1_pd(b1), one_b1 = _mm256_set1_pd(1.0 - b1);
  __m256d b2v = _mm256_set1_pd(b2), one_b2 = _mm256_set1_pd(1.0 - b2);
  __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
  __m256d bc1v = _mm256_set1_pd(bc1), bc2v = _mm256_set1_pd(bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_fmadd_pd(one_b1, gv, _mm256_mul_pd(b1v, _mm256_loadu_pd(m + i)));
    __m256d g2 = _mm256_mul_pd(gv, gv);
    __m256d vv = _mm256_fmadd_pd(one_b2, g2, _mm256_mul_pd(b2v, _mm256_loadu_pd(v + i)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, bc2v)), epsv);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mv, bc1v)), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

#else  // !GAILCHAT_X86: stubs so the target links; available() is false.

float dot(const float* x, const float* y, std::size_t n) { return scalar::dot(x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
void axpy(float a, const float* x, float* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void add(const float* x, const float* y, float* out, std::size_t n) { scalar::add(x, y, out, n); }
void add(const double* x, const double* y, double* out, std::size_t n) { scalar::add(x, y, out, n); }
void sub(const float* x, const float* y, float* out, std::size_t n) { scalar::sub(x, y, out, n); }
void sub(const double* x, const double* y, double* out, std::size_t n) { scalar::sub(x, y, out, n); }
void mul(const float* x, const float* y, float* out, std::size_t n) { scalar::mul(x, y, out, n); }
void mul(const double* x, const double* y, double* out, std::size_t n) { scalar::mul(x, y, out, n); }
void scale(const float* x, float a, float* out, std::size_t n) { scalar::scale(x, a, out, n); }
void scale(const double* x, double a, double* out, std::size_t n) { scalar::scale(x, a, out, n); }
float sum(const float* x, std::size_t n) { return scalar::sum(x, n); }
double sum(const double* x, std::size_t n) { return scalar::sum(x, n); }
void adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                 float lr, float b1, float b2, float eps, float bc1, float bc2) {
  scalar::adam_update(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
  scalar::adam_update(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}
#endif  // GAILCHAT_X86

}  // namespace gailchat::kern::avx2
