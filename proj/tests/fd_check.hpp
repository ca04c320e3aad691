#pragma once

// Central-finite-difference gradient oracle used across the test suites.
// Independent of the reverse-mode path it checks: it only re-evaluates the
// forward loss at perturbed parameters.

#include <algorithm>
#include <cmath>
#include <string>

#include "gailchat/optim.hpp"
#include "gailchat/tensor.hpp"

namespace gailchat::testing {

struct FdReport {
  double max_err = 0.0;       // |analytic - fd| / max(1, |analytic|, |fd|)
  std::string worst_param;
  std::size_t checked = 0;
};

// loss_fn rebuilds the graph and returns a scalar Tensor<double>.
template <class F>
FdReport fd_check(ParamSet<double>& params, F&& loss_fn, double h = 1e-3,
                  std::size_t max_per_param = 64) {
  params.zero_grad();
  auto loss = loss_fn();
  loss.backward();

  FdReport report;
  for (const auto& entry : params.entries()) {
    auto& tensor = params.at(entry.name);
    auto data = tensor.data();
    auto grad = tensor.grad();
    const std::size_t n = data.size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_per_param);
    for (std::size_t i = 0; i < n; i += stride) {
      const double keep = data[i];
      data[i] = keep + h;
      const double up = loss_fn().item();
      data[i] = keep - h;
      const double down = loss_fn().item();
      data[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double err =
          std::abs(grad[i] - fd) / std::max({1.0, std::abs(grad[i]), std::abs(fd)});
      ++report.checked;
      if (err > report.max_err) {
        report.max_err = err;
        report.worst_param = entry.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

}  // namespace gailchat::testing
