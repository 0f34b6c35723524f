#pragma once

#include "marl/nn/mlp.hpp"

namespace marl::nn {

// Polyak averaging: target <- tau * online + (1 - tau) * target.
// Results are clamped into the [target, online] interval so rounding never
// leaves the convex hull of the two operands.
template <typename Scalar>
void soft_update(MlpParams<Scalar>& target, const MlpParams<Scalar>& online, Scalar tau) {
  if (!(tau >= Scalar(0) && tau <= Scalar(1))) {
    throw ParameterError("soft_update: tau must lie in [0, 1]");
  }
  if (!target.same_shape(online)) {
    throw ShapeError("soft_update: target and online shapes differ");
  }
  if (tau == Scalar(0)) return;
  if (tau == Scalar(1)) {
    target = online;
    return;
  }
  for_each_tensor(
      [tau](auto& t, const auto& o) {
        auto lo = t.cwiseMin(o).eval();
        auto hi = t.cwiseMax(o).eval();
        t = (tau * o + (Scalar(1) - tau) * t).cwiseMax(lo).cwiseMin(hi);
      },
      target, online);
}

}  // namespace marl::nn
