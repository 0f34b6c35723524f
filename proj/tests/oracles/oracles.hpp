#pragma once

// Reference implementations used only by tests. None of these call into the
// library's numeric kernels; they work element by element on std::vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "marl/nn/mlp.hpp"

namespace oracle {

using Vec = std::vector<double>;

struct NaiveForward {
  Vec output;
  std::vector<bool> mask;  // ReLU activity of both hidden layers, in order
};

inline Vec affine(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, const Vec& x) {
  Vec out(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double acc = 0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * x[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc + b(r);
  }
  return out;
}

// Triple-loop forward pass that also reports which hidden units are active.
inline NaiveForward naive_mlp(const marl::nn::MlpParams<double>& p, const Vec& x) {
  NaiveForward f;
  Vec h1 = affine(p.w1, p.b1, x);
  for (double& v : h1) {
    f.mask.push_back(v > 0);
    v = std::max(v, 0.0);
  }
  Vec h2 = affine(p.w2, p.b2, h1);
  for (double& v : h2) {
    f.mask.push_back(v > 0);
    v = std::max(v, 0.0);
  }
  f.output = affine(p.w3, p.b3, h2);
  return f;
}

inline Vec column(const Eigen::MatrixXd& m, Eigen::Index c) {
  Vec out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

// Algorithm 1 as written: walk the anchors, build the window with a list
// comprehension, append it if every index lies inside the buffer, stop once
// at least b records are held.
inline std::vector<std::size_t> literal_neighbor_sampling(const std::vector<std::size_t>& indices,
                                                          std::size_t d, std::size_t n,
                                                          std::size_t b) {
  std::vector<std::size_t> obses_t;
  for (std::size_t i : indices) {
    std::vector<std::size_t> alpha;
    const long lo = std::max(0L, static_cast<long>(i) - static_cast<long>(n));
    const long hi = std::min(static_cast<long>(d), static_cast<long>(i + n + 1));
    for (long j = lo; j < hi; ++j) {
      if (j != static_cast<long>(i)) alpha.push_back(static_cast<std::size_t>(j));
    }
    bool subset = true;
    for (std::size_t k : alpha) subset = subset && k < d;
    if (subset) {
      for (std::size_t k : alpha) obses_t.push_back(k);
    }
    if (obses_t.size() >= b) break;
  }
  return obses_t;
}

// Log density of a = tanh(u), u ~ N(mean, exp(log_std)^2) per dimension, by
// change of variables: recover u = atanh(a) and divide by |da/du| = 1 - a^2.
// `stabilizer` is added inside the Jacobian log (0 gives the exact density).
inline double tanh_gaussian_log_density(const Vec& action, const Vec& mean, const Vec& log_std,
                                        double stabilizer) {
  double lp = 0;
  for (std::size_t k = 0; k < action.size(); ++k) {
    const double u = std::atanh(action[k]);
    const double sigma = std::exp(log_std[k]);
    const double z = (u - mean[k]) / sigma;
    lp += -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi);
    lp -= std::log(1 - action[k] * action[k] + stabilizer);
  }
  return lp;
}

struct FdValue {
  double loss;
  std::vector<bool> signature;  // any piecewise regime indicator
};

struct FdStats {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // entries whose +/- probes straddle a kink
  double max_rel_err = 0;
};

inline double rel_err(double a, double f, double floor) {
  return std::abs(a - f) / std::max({std::abs(a), std::abs(f), floor});
}

// Central differences over every entry of every tensor in `params`, compared
// against `analytic` (same layout). `loss` is re-evaluated with the perturbed
// parameters; entries whose two probes land in different regimes are skipped.
inline FdStats finite_difference_check(marl::nn::MlpParams<double>& params,
                                       const marl::nn::MlpParams<double>& analytic,
                                       const std::function<FdValue()>& loss, double eps,
                                       double floor) {
  FdStats stats;
  auto probe = [&](auto& t, const auto& g) {
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      double& w = t.data()[k];
      const double saved = w;
      w = saved + eps;
      const FdValue plus = loss();
      w = saved - eps;
      const FdValue minus = loss();
      w = saved;
      if (plus.signature != minus.signature) {
        ++stats.skipped;
        continue;
      }
      const double fd = (plus.loss - minus.loss) / (2 * eps);
      stats.max_rel_err = std::max(stats.max_rel_err, rel_err(g.data()[k], fd, floor));
      ++stats.checked;
    }
  };
  marl::nn::for_each_tensor(probe, params, analytic);
  return stats;
}

// Pearson chi-square statistic of observed counts against a uniform law.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

// Upper 0.001 quantile of the chi-square law with 15 degrees of freedom.
inline constexpr double kChiSquare15At0001 = 37.697;

}  // namespace oracle
