#pragma once

#include <cmath>
#include <numbers>

#include "marl/errors.hpp"
#include "marl/types.hpp"

namespace marl::nn {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;

// Batched tanh-squashed diagonal Gaussian, one sample per column.
template <typename Scalar>
struct SquashedBatch {
  MatrixX<Scalar> action;
  VectorX<Scalar> log_prob;
};

template <typename Scalar>
struct SquashedSample {
  VectorX<Scalar> action;
  Scalar log_prob;
};

template <typename Scalar>
struct SquashedGrads {
  MatrixX<Scalar> d_mean;
  MatrixX<Scalar> d_log_std;  // w.r.t. the unclamped head output
};

template <typename Scalar>
MatrixX<Scalar> clamp_log_std(const MatrixX<Scalar>& log_std) {
  return log_std.cwiseMax(Scalar(kLogStdMin)).cwiseMin(Scalar(kLogStdMax));
}

// action = tanh(mean + exp(log_std) * noise)
// log_prob = sum[-noise^2/2 - log_std - log(2 pi)/2] - sum log(1 - action^2 + 1e-6)
template <typename Scalar>
SquashedBatch<Scalar> squashed_gaussian_batch(const MatrixX<Scalar>& mean,
                                              const MatrixX<Scalar>& log_std,
                                              const MatrixX<Scalar>& noise) {
  if (mean.rows() != log_std.rows() || mean.rows() != noise.rows() ||
      mean.cols() != log_std.cols() || mean.cols() != noise.cols()) {
    throw ShapeError("squashed_gaussian: mean, log_std and noise shapes differ");
  }
  if (!mean.allFinite() || !log_std.allFinite() || !noise.allFinite()) {
    throw NonFiniteError("squashed_gaussian: non-finite input");
  }
  const MatrixX<Scalar> ls = clamp_log_std(log_std);
  SquashedBatch<Scalar> out;
  out.action = (mean.array() + ls.array().exp() * noise.array()).tanh().matrix();
  const Scalar half_log_2pi = Scalar(0.5 * std::log(2.0 * std::numbers::pi));
  auto gaussian = (Scalar(-0.5) * noise.array().square() - ls.array() - half_log_2pi);
  auto correction = (Scalar(1) - out.action.array().square() + Scalar(kTanhEps)).log();
  out.log_prob = (gaussian - correction).colwise().sum().transpose().matrix();
  return out;
}

template <typename Scalar>
SquashedSample<Scalar> squashed_gaussian_sample(const VectorX<Scalar>& mean,
                                                const VectorX<Scalar>& log_std,
                                                const VectorX<Scalar>& noise) {
  auto b = squashed_gaussian_batch<Scalar>(mean, log_std, noise);
  return {b.action.col(0), b.log_prob(0)};
}

// Reparameterized gradients given dL/daction (d x b) and dL/dlog_prob (b).
template <typename Scalar>
SquashedGrads<Scalar> squashed_gaussian_backward(const MatrixX<Scalar>& log_std,
                                                 const MatrixX<Scalar>& noise,
                                                 const MatrixX<Scalar>& action,
                                                 const MatrixX<Scalar>& upstream_action,
                                                 const VectorX<Scalar>& upstream_log_prob) {
  const MatrixX<Scalar> ls = clamp_log_std(log_std);
  auto one_minus_a2 = (Scalar(1) - action.array().square()).eval();
  auto glp = upstream_log_prob.transpose().replicate(action.rows(), 1).array().eval();
  auto d_pre = (upstream_action.array() * one_minus_a2 +
                glp * Scalar(2) * action.array() * one_minus_a2 /
                    (one_minus_a2 + Scalar(kTanhEps)))
                   .eval();
  SquashedGrads<Scalar> g;
  g.d_mean = d_pre.matrix();
  auto inside = ((log_std.array() >= Scalar(kLogStdMin)) && (log_std.array() <= Scalar(kLogStdMax)))
                    .template cast<Scalar>();
  g.d_log_std = ((d_pre * ls.array().exp() * noise.array() - glp) * inside).matrix();
  return g;
}

}  // namespace marl::nn
