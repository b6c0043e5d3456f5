#include "lact/nn/adam.hpp"

#include <cmath>

namespace lact::nn {

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state holds " + std::to_string(state.m.size()) +
                                " parameters, given " + std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (state.m[k].size() != params[k].size())
      throw std::invalid_argument("adam_step: moment shape differs for '" + params[k].name() + "'");
    for (double g : params[k].grad())
      if (!std::isfinite(g)) throw NonFiniteGradient(params[k].name());
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k].mutable_values();
    const auto grad = params[k].grad();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps_hat);
    }
  }
}

}  // namespace lact::nn
