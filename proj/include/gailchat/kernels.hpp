#pragma once

// Vector kernels behind all dense math in gailchat. Every kernel exists as a
// scalar reference implementation and, on x86-64 with AVX2+FMA, as a SIMD
// variant. The implementation set is picked once at startup from cpuid and
// can be overridden with GAILCHAT_KERNELS=scalar|avx2 (tests use this to
// check scalar/SIMD equivalence).
//
// Transcendental maps (sigmoid_v, tanh_v) call libm element-wise in both
// sets so their results are identical across implementations.

#include <cstddef>
#include <string>

namespace gailchat::kern {

// ---- scalar reference set ------------------------------------------------
namespace scalar {
float  dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void   axpy(float a, const float* x, float* y, std::size_t n);
void   axpy(double a, const double* x, double* y, std::size_t n);
void   add(const float* x, const float* y, float* out, std::size_t n);
void   add(const double* x, const double* y, double* out, std::size_t n);
void   sub(const float* x, const float* y, float* out, std::size_t n);
void   sub(const double* x, const double* y, double* out, std::size_t n);
void   mul(const float* x, const float* y, float* out, std::size_t n);
void   mul(const double* x, const double* y, double* out, std::size_t n);
void   scale(const float* x, float a, float* out, std::size_t n);
void   scale(const double* x, double a, double* out, std::size_t n);
float  sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
void   adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                   float lr, float beta1, float beta2, float eps,
                   float bc1, float bc2);
void   adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                   double lr, double beta1, double beta2, double eps,
                   double bc1, double bc2);
}  // namespace scalar

// ---- AVX2+FMA set ----------------------------------------------------------
namespace avx2 {
bool available();  // cpuid says the host can run these
float  dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void   axpy(float a, const float* x, float* y, std::size_t n);
void   axpy(double a, const double* x, double* y, std::size_t n);
void   add(const float* x, const float* y, float* out, std::size_t n);
void   add(const double* x, const double* y, double* out, std::size_t n);
void   sub(const float* x, const float* y, float* out, std::size_t n);
void   sub(const double* x, const double* y, double* out, std::size_t n);
void   mul(const float* x, const float* y, float* out, std::size_t n);
void   mul(const double* x, const double* y, double* out, std::size_t n);
void   scale(const float* x, float a, float* out, std::size_t n);
void   scale(const double* x, double a, double* out, std::size_t n);
float  sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
void   adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                   float lr, float beta1, float beta2, float eps,
                   float bc1, float bc2);
void   adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                   double lr, double beta1, double beta2, double eps,
                   double bc1, double bc2);
}  // namespace avx2

// ---- dispatched entry points -----------------------------------------------
std::string active_impl();              // "scalar" or "avx2"
void select_impl(const std::string&);   // throws if the set cannot run here

float  dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void   axpy(float a, const float* x, float* y, std::size_t n);
void   axpy(double a, const double* x, double* y, std::size_t n);
void   add(const float* x, const float* y, float* out, std::size_t n);
void   add(const double* x, const double* y, double* out, std::size_t n);
void   sub(const float* x, const float* y, float* out, std::size_t n);
void   sub(const double* x, const double* y, double* out, std::size_t n);
void   mul(const float* x, const float* y, float* out, std::size_t n);
void   mul(const double* x, const double* y, double* out, std::size_t n);
void   scale(const float* x, float a, float* out, std::size_t n);
void   scale(const double* x, double a, double* out, std::size_t n);
float  sum(const float* x, std::size_t n);
double sum(const double* x, std::size_t n);
void   adam_update(float* p, float* m, float* v, const float* g, std::size_t n,
                   float lr, float beta1, float beta2, float eps,
                   float bc1, float bc2);
void   adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                   double lr, double beta1, double beta2, double eps,
                   double bc1, double bc2);

// element-wise transcendentals, same in every set
template <class T> void sigmoid_v(const T* x, T* out, std::size_t n);
template <class T> void tanh_v(const T* x, T* out, std::size_t n);

// Row-major GEMM composed from the vector kernels above.
//   gemm_nn: C(MxN) (+)= A(MxK) * B(KxN)
//   gemm_nt: C(MxN) (+)= A(MxK) * B(NxK)^T
//   gemm_tn: C(MxN) (+)= A(KxM)^T * B(KxN)
template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const T* a, const T* b, T* c, bool accumulate);
template <class T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const T* a, const T* b, T* c, bool accumulate);
template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const T* a, const T* b, T* c, bool accumulate);

}  // namespace gailchat::kern
