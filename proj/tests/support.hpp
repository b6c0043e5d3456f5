#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lact/nn/ops.hpp"
#include "lact/nn/tensor.hpp"
#include "lact/raster.hpp"
#include "lact/rng.hpp"

namespace lact::test {

inline std::vector<double> random_values(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Array2 random_array(std::size_t rows, std::size_t cols, Rng& rng) {
  return Array2(rows, cols, random_values(rows * cols, rng));
}

inline double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// |lhs - rhs| / max(|lhs|, |rhs|), the usual adjoint-test measure.
inline double rel_gap(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

/// Compares the taped gradient of loss() with respect to param against
/// central differences on up to max_probes evenly spread entries. Returns
/// ||analytic - numeric|| / ||numeric|| over the probed entries.
inline double gradient_error(nn::Tensor param, const std::function<nn::Tensor()>& loss,
                             std::size_t max_probes = 24, double h = 1e-5) {
  param.zero_grad();
  nn::backward(loss());
  const std::vector<double> analytic(param.grad().begin(), param.grad().end());
  const std::size_t n = param.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_probes);
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < n; i += stride) {
    auto v = param.mutable_values();
    const double keep = v[i];
    v[i] = keep + h;
    const double up = loss().item();
    v[i] = keep - h;
    const double down = loss().item();
    v[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    diff += (analytic[i] - numeric) * (analytic[i] - numeric);
    norm += numeric * numeric;
  }
  return norm == 0.0 ? std::sqrt(diff) : std::sqrt(diff / norm);
}

}  // namespace lact::test

namespace lact::test {

inline nn::Tensor random_tensor(nn::Shape s, Rng& rng, bool param = true, double lo = -1.0,
                                double hi = 1.0) {
  auto v = random_values(s.size(), rng, lo, hi);
  return param ? nn::Tensor::parameter(s, std::move(v), "x") : nn::Tensor::constant(s, std::move(v));
}

}  // namespace lact::test

namespace lact::test {

/// <L x, y> and <x, L^T y> for a linear tape operation L, the transpose
/// taken from the backward pass.
inline std::pair<double, double> adjoint_pair(const std::function<nn::Tensor(const nn::Tensor&)>& op,
                                              nn::Shape in, Rng& rng) {
  nn::Tensor x = random_tensor(in, rng);
  const nn::Tensor fx = op(x);
  const nn::Tensor y = random_tensor(fx.shape(), rng, false);
  const double lhs = nn::dot(fx, y).item();
  nn::Tensor probe = nn::Tensor::parameter(in, std::vector<double>(x.values().begin(), x.values().end()));
  nn::backward(nn::dot(op(probe), y));
  return {lhs, inner(x.values(), probe.grad())};
}

}  // namespace lact::test
