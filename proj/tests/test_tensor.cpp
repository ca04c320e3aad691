#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "gailchat/gru.hpp"
#include "gailchat/optim.hpp"
#include "gailchat/rng.hpp"
#include "gailchat/tensor.hpp"

using namespace gailchat;
using D = Tensor<double>;

TEST_CASE("softmax of uniform logits is uniform, rows sum to 1") {
  auto x = D::from({1, 4}, {0, 0, 0, 0});
  auto s = softmax_rows(x);
  for (auto v : s.data()) CHECK(v == doctest::Approx(0.25));

  Rng rng(3);
  std::vector<double> data(24);
  for (auto& v : data) v = rng.uniform(-4, 4);
  auto y = softmax_rows(D::from({4, 6}, std::move(data)));
  for (int r = 0; r < 4; ++r) {
    double sum = 0;
    for (int c = 0; c < 6; ++c) {
      CHECK(y.at(r, c) > 0.0);
      sum += y.at(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sigmoid(0) = 0.5 and d/dx sigmoid at 0 = 0.25") {
  auto x = D::from({1}, {0.0}, true);
  auto s = sigmoid(x);
  CHECK(s.item() == doctest::Approx(0.5));
  s.backward();
  CHECK(x.grad()[0] == doctest::Approx(0.25));
}

TEST_CASE("matmul identity and the sum(A*B) gradient identity") {
  auto eye = D::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto a = D::from({3, 2}, {1, 2, 3, 4, 5, 6});
  auto prod = matmul(eye, a);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) CHECK(prod.at(r, c) == a.at(r, c));

  // d/dA sum(A*B) = ones * B^T
  auto A = D::from({2, 3}, {0.5, -1, 2, 3, 0.25, -0.75}, true);
  auto B = D::from({3, 2}, {1, 2, 3, 4, 5, 6});
  sum(matmul(A, B)).backward();
  // row i of expected grad: column sums of B^T rows = row sums of B
  const double expected[3] = {1 + 2, 3 + 4, 5 + 6};
  auto g = A.grad();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) CHECK(g[r * 3 + c] == doctest::Approx(expected[c]));
}

TEST_CASE("cross entropy analytic values and error paths") {
  // uniform logits over V=20 -> ln 20
  auto logits = D::zeros({1, 20});
  auto ce = cross_entropy(logits, std::vector<int>{7}, {1});
  CHECK(ce.item() == doctest::Approx(std::log(20.0)).epsilon(1e-9));

  // saturated target -> loss ~ 0
  std::vector<double> big(20, 0.0);
  big[7] = 100.0;
  auto ce2 = cross_entropy(D::from({1, 20}, std::move(big)), std::vector<int>{7}, {1});
  CHECK(ce2.item() == doctest::Approx(0.0).epsilon(1e-9));

  // two-class [1,0], target 0 -> -ln(e/(e+1))
  auto ce3 = cross_entropy(D::from({1, 2}, {1.0, 0.0}), std::vector<int>{0}, {1});
  CHECK(ce3.item() == doctest::Approx(0.31326168751822286).epsilon(1e-12));

  CHECK_THROWS_AS(cross_entropy(D::zeros({2, 5}), std::vector<int>{0, 1}, {0, 0}),
                  std::invalid_argument);
}

TEST_CASE("shape mismatches raise errors naming both shapes") {
  auto a = D::zeros({2, 3});
  auto b = D::zeros({4, 5});
  try {
    add(a, b);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[4,5]") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(mul(a, b), std::invalid_argument);
}

TEST_CASE("backward requires a scalar and accumulates on leaves") {
  auto x = D::from({2}, {1.0, 2.0}, true);
  CHECK_THROWS_AS(mul_scalar(x, 2.0).backward(), std::invalid_argument);

  auto loss = sum(mul_scalar(x, 3.0));
  loss.backward();
  loss.backward();  // accumulates
  CHECK(x.grad()[0] == doctest::Approx(6.0));
  CHECK(x.grad()[1] == doctest::Approx(6.0));
}

TEST_CASE("masked positions carry no gradient and no influence") {
  auto x = D::from({1, 4}, {1, 2, 3, 4}, true);
  auto filled = masked_fill(x, {0, 1, 0, 1}, -100.0);
  CHECK(filled.at(0, 1) == -100.0);
  CHECK(filled.at(0, 0) == 1.0);
  sum(mul(filled, filled)).backward();
  auto g = x.grad();
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == 0.0);
  CHECK(g[3] == 0.0);
}

TEST_CASE("entropy of a uniform row is ln V; masked entries drop out") {
  auto e = entropy_rows(D::zeros({1, 8}));
  CHECK(e.item() == doctest::Approx(std::log(8.0)).epsilon(1e-9));

  const double inf = std::numeric_limits<double>::infinity();
  auto e2 = entropy_rows(D::from({1, 4}, {0.0, -inf, 0.0, -inf}));
  CHECK(e2.item() == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("random 3-layer net gradients match finite differences") {
  Rng rng(17);
  ParamSet<double> params;
  auto w1 = params.add("w1", xavier_init<double>(6, 5, rng));
  auto b1 = params.add("b1", Tensor<double>::zeros({6}, true));
  auto w2 = params.add("w2", xavier_init<double>(7, 6, rng));
  auto b2 = params.add("b2", Tensor<double>::zeros({7}, true));
  auto w3 = params.add("w3", xavier_init<double>(4, 7, rng));
  auto b3 = params.add("b3", Tensor<double>::zeros({4}, true));

  std::vector<double> xdata(3 * 5);
  for (auto& v : xdata) v = rng.uniform(-1, 1);
  auto x = D::from({3, 5}, std::move(xdata));
  std::vector<int> targets = {1, 0, 3};
  std::vector<std::uint8_t> active = {1, 1, 1};

  auto loss_fn = [&] {
    auto h1 = tanh_t(linear(x, params.at("w1"), params.at("b1")));
    auto h2 = sigmoid(linear(h1, params.at("w2"), params.at("b2")));
    auto logits = linear(h2, params.at("w3"), params.at("b3"));
    return cross_entropy(logits, targets, active);
  };
  auto report = testing::fd_check(params, loss_fn);
  CAPTURE(report.worst_param);
  CHECK(report.checked > 50);
  CHECK(report.max_err <= 1e-4);
}

TEST_CASE("structured ops gradients match finite differences") {
  Rng rng(23);
  ParamSet<double> params;
  params.add("table", xavier_init<double>(6, 4, rng));
  params.add("w", xavier_init<double>(3, 4, rng));
  params.add("s", xavier_init<double>(4, 1, rng));

  std::vector<int> ids = {0, 5, 2, 2};
  std::vector<std::uint8_t> fill = {0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};  // {4,3} mask
  auto loss_fn = [&] {
    auto rows = gather_rows(params.at("table"), ids);            // {4,4}
    auto proj = linear(rows, params.at("w"), Tensor<double>());  // {4,3}
    auto masked = masked_fill(proj, fill, -std::numeric_limits<double>::infinity());
    auto attn = softmax_rows(masked);                            // {4,3}
    auto left = slice_cols(attn, 0, 2);                          // {4,2}
    auto scaled = scale_rows(left, params.at("s"));              // {4,2}
    auto inner = concat_cols<double>({scaled, softplus(row_sum(rows))});
    auto ent = entropy_rows(masked);
    return add(mean(mul(inner, inner)), mean(ent));
  };
  auto report = testing::fd_check(params, loss_fn);
  CAPTURE(report.worst_param);
  CHECK(report.max_err <= 1e-4);
}

TEST_CASE("NoGrad suppresses graph recording") {
  auto x = D::from({2}, {1.0, 2.0}, true);
  {
    NoGrad ng;
    auto y = sum(mul(x, x));
    CHECK_FALSE(y.requires_grad());
    y.backward();  // no-op
  }
  CHECK_FALSE(x.has_grad());
}

TEST_CASE("Adam over a ParamSet: counters, missing-grad error") {
  Rng rng(5);
  ParamSet<double> params;
  params.add("p", Tensor<double>::from({2}, {1.0, -1.0}, true));
  Adam<double> adam(AdamConfig<double>{0.1, 0.9, 0.999, 1e-8});
  CHECK_THROWS_AS(adam.step(params), std::invalid_argument);  // no grads yet

  auto loss = sum(mul(params.at("p"), params.at("p")));
  loss.backward();
  adam.step(params);
  CHECK(adam.step_count() == 1);
  CHECK(params.at("p").data()[0] < 1.0);
  CHECK(params.at("p").data()[1] > -1.0);
  // step() zeroes gradients
  for (auto g : params.at("p").grad()) CHECK(g == 0.0);
}

TEST_CASE("ParamSet rejects duplicates and non-grad tensors") {
  ParamSet<double> params;
  params.add("a", Tensor<double>::zeros({2}, true));
  CHECK_THROWS_AS(params.add("a", Tensor<double>::zeros({2}, true)), std::invalid_argument);
  CHECK_THROWS_AS(params.add("b", Tensor<double>::zeros({2}, false)), std::invalid_argument);
  CHECK_THROWS_AS(params.at("missing"), std::invalid_argument);
}
