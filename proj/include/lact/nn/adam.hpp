#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lact/nn/tensor.hpp"

namespace lact::nn {

/// A gradient with a NaN or infinity; the message names the parameter.
class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient in parameter '" + param + "'"), param_(param) {}
  const std::string& param() const { return param_; }

 private:
  std::string param_;
};

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  std::size_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update of every parameter from its accumulated
/// gradient. Moments are allocated on the first call. All gradients are
/// checked before any parameter changes.
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace lact::nn
