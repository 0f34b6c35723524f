#pragma once

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "marl/errors.hpp"
#include "marl/types.hpp"

namespace marl::nn {

inline constexpr Eigen::Index kDefaultHidden = 64;

// Two-hidden-layer ReLU perceptron:
//   out = w3 * relu(w2 * relu(w1 * x + b1) + b2) + b3
// Batched inputs are column-major with one sample per column.
template <typename Scalar>
struct MlpParams {
  MatrixX<Scalar> w1;
  VectorX<Scalar> b1;
  MatrixX<Scalar> w2;
  VectorX<Scalar> b2;
  MatrixX<Scalar> w3;
  VectorX<Scalar> b3;

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
  Eigen::Index output_dim() const { return w3.rows(); }

  Eigen::Index parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
  }

  static MlpParams zeros(Eigen::Index in, Eigen::Index out, Eigen::Index hidden = kDefaultHidden) {
    if (in <= 0 || out <= 0 || hidden <= 0) {
      throw ShapeError("mlp dimensions must be positive");
    }
    MlpParams p;
    p.w1 = MatrixX<Scalar>::Zero(hidden, in);
    p.b1 = VectorX<Scalar>::Zero(hidden);
    p.w2 = MatrixX<Scalar>::Zero(hidden, hidden);
    p.b2 = VectorX<Scalar>::Zero(hidden);
    p.w3 = MatrixX<Scalar>::Zero(out, hidden);
    p.b3 = VectorX<Scalar>::Zero(out);
    return p;
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() &&
           w3.allFinite() && b3.allFinite();
  }

  bool same_shape(const MlpParams& o) const {
    return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
           w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size() &&
           w3.rows() == o.w3.rows() && w3.cols() == o.w3.cols() && b3.size() == o.b3.size();
  }

  bool operator==(const MlpParams& o) const {
    return same_shape(o) && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 &&
           w3 == o.w3 && b3 == o.b3;
  }
};

// Gradients share the parameter layout.
template <typename Scalar>
using MlpGrads = MlpParams<Scalar>;

// Calls f(a.w1, b.w1, ...), f(a.b1, b.b1, ...), ... over the six tensors.
template <typename F, typename First, typename... Rest>
void for_each_tensor(F&& f, First& first, Rest&... rest) {
  f(first.w1, rest.w1...);
  f(first.b1, rest.b1...);
  f(first.w2, rest.w2...);
  f(first.b2, rest.b2...);
  f(first.w3, rest.w3...);
  f(first.b3, rest.b3...);
}

// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
template <typename Scalar, typename Gen>
MlpParams<Scalar> init_mlp(Eigen::Index in, Eigen::Index out, Gen& rng,
                           Eigen::Index hidden = kDefaultHidden) {
  auto p = MlpParams<Scalar>::zeros(in, out, hidden);
  auto fill = [&rng](auto& t, Eigen::Index fan_in) {
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(fan_in));
    std::uniform_real_distribution<Scalar> dist(-bound, bound);
    for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = dist(rng);
  };
  fill(p.w1, in);
  fill(p.b1, in);
  fill(p.w2, hidden);
  fill(p.b2, hidden);
  fill(p.w3, hidden);
  fill(p.b3, hidden);
  return p;
}

// Activations retained by the forward pass for backpropagation.
template <typename Scalar>
struct MlpCache {
  MatrixX<Scalar> input;
  MatrixX<Scalar> z1;  // pre-activation, layer 1
  MatrixX<Scalar> h1;
  MatrixX<Scalar> z2;
  MatrixX<Scalar> h2;
};

template <typename Scalar>
struct MlpForward {
  MatrixX<Scalar> output;
  MlpCache<Scalar> cache;
};

template <typename Scalar>
struct MlpBackward {
  MlpGrads<Scalar> grads;
  MatrixX<Scalar> input_grad;
};

namespace detail {

template <typename Scalar>
void check_input(const MlpParams<Scalar>& p, Eigen::Index rows) {
  if (rows != p.input_dim()) {
    throw ShapeError("mlp input has " + std::to_string(rows) + " rows, expected " +
                     std::to_string(p.input_dim()));
  }
}

template <typename Scalar>
void check_upstream(const MlpParams<Scalar>& p, const MlpCache<Scalar>& cache,
                    const MatrixX<Scalar>& upstream) {
  if (cache.z1.rows() != p.hidden_dim() || cache.input.rows() != p.input_dim() ||
      cache.z2.rows() != p.hidden_dim()) {
    throw ShapeError("mlp cache does not match parameters");
  }
  if (upstream.rows() != p.output_dim() || upstream.cols() != cache.input.cols()) {
    throw ShapeError("mlp upstream gradient shape mismatch");
  }
}

}  // namespace detail

// Inference-only forward pass; no cache.
template <typename Scalar>
MatrixX<Scalar> mlp_apply(const MlpParams<Scalar>& p,
                          const Eigen::Ref<const MatrixX<Scalar>>& input) {
  detail::check_input(p, input.rows());
  MatrixX<Scalar> h1 = ((p.w1 * input).colwise() + p.b1).cwiseMax(Scalar(0));
  MatrixX<Scalar> h2 = ((p.w2 * h1).colwise() + p.b2).cwiseMax(Scalar(0));
  return (p.w3 * h2).colwise() + p.b3;
}

template <typename Scalar>
MlpForward<Scalar> mlp_forward(const MlpParams<Scalar>& p,
                               const Eigen::Ref<const MatrixX<Scalar>>& input) {
  detail::check_input(p, input.rows());
  MlpForward<Scalar> f;
  f.cache.input = input;
  f.cache.z1 = (p.w1 * input).colwise() + p.b1;
  f.cache.h1 = f.cache.z1.cwiseMax(Scalar(0));
  f.cache.z2 = (p.w2 * f.cache.h1).colwise() + p.b2;
  f.cache.h2 = f.cache.z2.cwiseMax(Scalar(0));
  f.output = (p.w3 * f.cache.h2).colwise() + p.b3;
  return f;
}

namespace detail {

template <typename Scalar>
MatrixX<Scalar> relu_mask(const MatrixX<Scalar>& z) {
  return (z.array() > Scalar(0)).template cast<Scalar>().matrix();
}

}  // namespace detail

// Gradients of sum(upstream .* output) with respect to every parameter and to
// the input. Parameter gradients are summed over the batch columns.
template <typename Scalar>
MlpBackward<Scalar> mlp_backward(const MlpParams<Scalar>& p, const MlpCache<Scalar>& cache,
                                 const MatrixX<Scalar>& upstream) {
  detail::check_upstream(p, cache, upstream);
  MlpBackward<Scalar> b;
  auto& g = b.grads;
  g.w3.noalias() = upstream * cache.h2.transpose();
  g.b3 = upstream.rowwise().sum();
  MatrixX<Scalar> dz2 = (p.w3.transpose() * upstream).cwiseProduct(detail::relu_mask(cache.z2));
  g.w2.noalias() = dz2 * cache.h1.transpose();
  g.b2 = dz2.rowwise().sum();
  MatrixX<Scalar> dz1 = (p.w2.transpose() * dz2).cwiseProduct(detail::relu_mask(cache.z1));
  g.w1.noalias() = dz1 * cache.input.transpose();
  g.b1 = dz1.rowwise().sum();
  b.input_grad.noalias() = p.w1.transpose() * dz1;
  return b;
}

// Input gradient only; skips the parameter-gradient products.
template <typename Scalar>
MatrixX<Scalar> mlp_input_gradient(const MlpParams<Scalar>& p, const MlpCache<Scalar>& cache,
                                   const MatrixX<Scalar>& upstream) {
  detail::check_upstream(p, cache, upstream);
  MatrixX<Scalar> dz2 = (p.w3.transpose() * upstream).cwiseProduct(detail::relu_mask(cache.z2));
  MatrixX<Scalar> dz1 = (p.w2.transpose() * dz2).cwiseProduct(detail::relu_mask(cache.z1));
  return p.w1.transpose() * dz1;
}

}  // namespace marl::nn
