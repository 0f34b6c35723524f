#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace marl {

#ifdef MARL_SINGLE_PRECISION
using Real = float;
#else
using Real = double;
#endif

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<Real>;
using Vector = VectorX<Real>;
using Vec2 = Eigen::Matrix<Real, 2, 1>;

// All randomness in the engine flows through this generator so a run is
// reproducible from its seed on a fixed platform.
using Rng = std::mt19937_64;

// Derives an independent stream from a base seed and a stream tag.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace marl
