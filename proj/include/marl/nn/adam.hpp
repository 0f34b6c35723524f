#pragma once

#include <cmath>
#include <cstdint>

#include "marl/nn/mlp.hpp"

namespace marl::nn {

template <typename Scalar>
struct AdamState {
  MlpParams<Scalar> m;
  MlpParams<Scalar> v;
  std::int64_t t = 0;
  Scalar lr = Scalar(0.01);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  static AdamState for_params(const MlpParams<Scalar>& params, Scalar lr = Scalar(0.01)) {
    AdamState s;
    s.m = MlpParams<Scalar>::zeros(params.input_dim(), params.output_dim(), params.hidden_dim());
    s.v = s.m;
    s.lr = lr;
    return s;
  }
};

// One bias-corrected Adam step. Rejects non-finite gradients before touching
// any state.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, MlpParams<Scalar>& params, const MlpGrads<Scalar>& grads) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw ShapeError("adam_step: parameter, gradient and moment shapes differ");
  }
  if (!grads.all_finite()) {
    throw NonFiniteError("adam_step: non-finite gradient");
  }
  state.t += 1;
  const Scalar t = static_cast<Scalar>(state.t);
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, t);
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, t);
  const Scalar b1 = state.beta1, b2 = state.beta2, lr = state.lr, eps = state.eps;
  for_each_tensor(
      [&](auto& p, const auto& g, auto& m, auto& v) {
        m = b1 * m + (Scalar(1) - b1) * g;
        v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
      },
      params, grads, state.m, state.v);
}

}  // namespace marl::nn
