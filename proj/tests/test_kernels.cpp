#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gailchat/kernels.hpp"
#include "gailchat/rng.hpp"

using namespace gailchat;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

// sizes that exercise full SIMD lanes, remainders and tiny inputs
const std::vector<std::size_t> kSizes = {1, 3, 7, 8, 9, 16, 17, 64, 100, 1000};

}  // namespace

TEST_CASE("scalar and avx2 kernel sets agree") {
  if (!kern::avx2::available()) {
    MESSAGE("avx2 unavailable on this host; equivalence suite skipped");
    return;
  }
  Rng rng(42);
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    auto xf = random_vec<float>(n, rng);
    auto yf = random_vec<float>(n, rng);
    auto xd = random_vec<double>(n, rng);
    auto yd = random_vec<double>(n, rng);

    // exact element-wise kernels
    std::vector<float> a(n), b(n);
    std::vector<double> ad(n), bd(n);
    kern::scalar::add(xf.data(), yf.data(), a.data(), n);
    kern::avx2::add(xf.data(), yf.data(), b.data(), n);
    CHECK(a == b);
    kern::scalar::sub(xf.data(), yf.data(), a.data(), n);
    kern::avx2::sub(xf.data(), yf.data(), b.data(), n);
    CHECK(a == b);
    kern::scalar::mul(xf.data(), yf.data(), a.data(), n);
    kern::avx2::mul(xf.data(), yf.data(), b.data(), n);
    CHECK(a == b);
    kern::scalar::scale(xf.data(), 1.7f, a.data(), n);
    kern::avx2::scale(xf.data(), 1.7f, b.data(), n);
    CHECK(a == b);
    kern::scalar::add(xd.data(), yd.data(), ad.data(), n);
    kern::avx2::add(xd.data(), yd.data(), bd.data(), n);
    CHECK(ad == bd);

    // reductions and fma kernels differ by rounding/association only
    CHECK(kern::scalar::dot(xf.data(), yf.data(), n) ==
          doctest::Approx(kern::avx2::dot(xf.data(), yf.data(), n)).epsilon(1e-5));
    CHECK(kern::scalar::dot(xd.data(), yd.data(), n) ==
          doctest::Approx(kern::avx2::dot(xd.data(), yd.data(), n)).epsilon(1e-13));
    CHECK(kern::scalar::sum(xf.data(), n) ==
          doctest::Approx(kern::avx2::sum(xf.data(), n)).epsilon(1e-5));
    CHECK(kern::scalar::sum(xd.data(), n) ==
          doctest::Approx(kern::avx2::sum(xd.data(), n)).epsilon(1e-13));

    auto y1 = yd, y2 = yd;
    kern::scalar::axpy(0.37, xd.data(), y1.data(), n);
    kern::avx2::axpy(0.37, xd.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    // adam: both sets walk the same trajectory within rounding
    auto p1 = random_vec<double>(n, rng), p2 = p1;
    std::vector<double> m1(n, 0), v1(n, 0), m2(n, 0), v2(n, 0);
    auto g = random_vec<double>(n, rng);
    for (int t = 1; t <= 3; ++t) {
      const double bc1 = 1.0 / (1.0 - std::pow(0.9, t));
      const double bc2 = 1.0 / (1.0 - std::pow(0.999, t));
      kern::scalar::adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9, 0.999,
                                1e-8, bc1, bc2);
      kern::avx2::adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9, 0.999, 1e-8,
                              bc1, bc2);
    }
    for (std::size_t i = 0; i < n; ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
  }
}

TEST_CASE("gemm identities") {
  Rng rng(7);
  const std::size_t m = 5, k = 4, n = 6;
  auto a = random_vec<double>(m * k, rng);
  auto b = random_vec<double>(k * n, rng);

  // identity * B == B
  std::vector<double> eye(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) eye[i * k + i] = 1.0;
  std::vector<double> c(k * n, 0.0);
  kern::gemm_nn(k, n, k, eye.data(), b.data(), c.data(), false);
  for (std::size_t i = 0; i < k * n; ++i) CHECK(c[i] == doctest::Approx(b[i]));

  // nt and tn against a reference nn with explicit transposes
  std::vector<double> bt(n * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) bt[j * k + i] = b[i * n + j];
  std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0);
  kern::gemm_nn(m, n, k, a.data(), b.data(), c1.data(), false);
  kern::gemm_nt(m, n, k, a.data(), bt.data(), c2.data(), false);
  for (std::size_t i = 0; i < m * n; ++i) CHECK(c1[i] == doctest::Approx(c2[i]).epsilon(1e-12));

  std::vector<double> at(k * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) at[j * m + i] = a[i * k + j];
  std::vector<double> c3(m * n, 0.0);
  kern::gemm_tn(m, n, k, at.data(), b.data(), c3.data(), false);
  for (std::size_t i = 0; i < m * n; ++i) CHECK(c1[i] == doctest::Approx(c3[i]).epsilon(1e-12));

  // accumulate adds on top
  kern::gemm_nn(m, n, k, a.data(), b.data(), c1.data(), true);
  std::vector<double> c4(m * n, 0.0);
  kern::gemm_nn(m, n, k, a.data(), b.data(), c4.data(), false);
  for (std::size_t i = 0; i < m * n; ++i) CHECK(c1[i] == doctest::Approx(2 * c4[i]).epsilon(1e-12));
}

TEST_CASE("adam first step moves by -lr*sign(g) and zero grad is a no-op") {
  double p = 1.0, m = 0.0, v = 0.0, g = 0.3;
  const double lr = 0.01;
  kern::adam_update(&p, &m, &v, &g, 1, lr, 0.9, 0.999, 1e-8, 1.0 / (1.0 - 0.9),
                    1.0 / (1.0 - 0.999));
  CHECK(p == doctest::Approx(1.0 - lr * g / (std::abs(g) + 1e-8)).epsilon(1e-12));

  double p2 = 2.5, m2 = 0.0, v2 = 0.0, g2 = 0.0;
  kern::adam_update(&p2, &m2, &v2, &g2, 1, lr, 0.9, 0.999, 1e-8, 10.0, 1000.0);
  CHECK(p2 == 2.5);
}

TEST_CASE("adam is sign-equivariant: negated gradients negate the update") {
  Rng rng(11);
  const std::size_t n = 33;
  auto g = random_vec<double>(n, rng);
  auto gneg = g;
  for (auto& x : gneg) x = -x;
  std::vector<double> p1(n, 1.0), m1(n, 0), v1(n, 0);
  std::vector<double> p2(n, 1.0), m2(n, 0), v2(n, 0);
  const double bc1 = 1.0 / (1.0 - 0.9), bc2 = 1.0 / (1.0 - 0.999);
  kern::adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-2, 0.9, 0.999, 1e-8, bc1, bc2);
  kern::adam_update(p2.data(), m2.data(), v2.data(), gneg.data(), n, 1e-2, 0.9, 0.999, 1e-8, bc1, bc2);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(p1[i] - 1.0 == doctest::Approx(-(p2[i] - 1.0)).epsilon(1e-10));
}

TEST_CASE("100 adam steps shrink x on f(x)=x^2") {
  double x = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    const double g = 2.0 * x;
    const double bc1 = 1.0 / (1.0 - std::pow(0.9, t));
    const double bc2 = 1.0 / (1.0 - std::pow(0.999, t));
    kern::adam_update(&x, &m, &v, &g, 1, 0.1, 0.9, 0.999, 1e-8, bc1, bc2);
  }
  CHECK(std::abs(x) < 0.5);
}

TEST_CASE("dispatch honors select_impl") {
  const std::string before = kern::active_impl();
  kern::select_impl("scalar");
  CHECK(kern::active_impl() == "scalar");
  float x[3] = {1, 2, 3}, y[3] = {4, 5, 6};
  CHECK(kern::dot(x, y, 3) == doctest::Approx(32.0f));
  if (kern::avx2::available()) {
    kern::select_impl("avx2");
    CHECK(kern::active_impl() == "avx2");
    CHECK(kern::dot(x, y, 3) == doctest::Approx(32.0f));
  }
  CHECK_THROWS(kern::select_impl("neon"));
  kern::select_impl(before);
}
