#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "marl/nn.hpp"
#include "oracles/oracles.hpp"

namespace {

using marl::nn::MlpParams;
using P = MlpParams<double>;

P random_params(Eigen::Index in, Eigen::Index out, std::uint64_t seed, Eigen::Index hidden = 64) {
  std::mt19937_64 rng(seed);
  return marl::nn::init_mlp<double>(in, out, rng, hidden);
}

TEST(mlp_forward, zero_params_give_zero_output) {
  const auto p = P::zeros(5, 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 4);
  const auto f = marl::nn::mlp_forward<double>(p, x);
  EXPECT_TRUE(f.output.isZero(0));
  EXPECT_EQ(f.output.rows(), 3);
  EXPECT_EQ(f.output.cols(), 4);
}

TEST(mlp_forward, relu_gates_negative_preactivations) {
  auto p = P::zeros(1, 1);
  p.w1.setOnes();
  p.w2.setIdentity();
  p.w3.setOnes();
  Eigen::MatrixXd x(1, 1);
  x << -1;
  EXPECT_EQ(marl::nn::mlp_forward<double>(p, x).output(0, 0), 0.0);
  x << 2;
  EXPECT_DOUBLE_EQ(marl::nn::mlp_forward<double>(p, x).output(0, 0), 128.0);
}

TEST(mlp_forward, matches_naive_loops) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_params(4, 3, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(-2, 2);
    Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(4, 5, [&] { return u(rng); });
    const auto out = marl::nn::mlp_forward<double>(p, x).output;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto ref = oracle::naive_mlp(p, oracle::column(x, c)).output;
      for (Eigen::Index r = 0; r < 3; ++r) {
        EXPECT_LT(oracle::rel_err(out(r, c), ref[static_cast<std::size_t>(r)], 1e-300), 1e-12);
      }
    }
  }
}

TEST(mlp_forward, apply_equals_forward_output) {
  const auto p = random_params(6, 2, 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 7);
  EXPECT_EQ(marl::nn::mlp_apply<double>(p, x), marl::nn::mlp_forward<double>(p, x).output);
}

TEST(mlp_forward, deterministic_bitwise) {
  const auto p = random_params(4, 2, 9);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  EXPECT_EQ(marl::nn::mlp_forward<double>(p, x).output, marl::nn::mlp_forward<double>(p, x).output);
}

TEST(mlp_forward, rejects_wrong_input_width) {
  const auto p = random_params(4, 2, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 1);
  EXPECT_THROW(marl::nn::mlp_forward<double>(p, x), marl::ShapeError);
  EXPECT_THROW(marl::nn::mlp_apply<double>(p, x), marl::ShapeError);
}

TEST(mlp_params, zero_dimension_rejected) {
  EXPECT_THROW(P::zeros(0, 1), marl::ShapeError);
  EXPECT_THROW(P::zeros(1, 1, 0), marl::ShapeError);
}

TEST(mlp_params, init_respects_fan_in_bound) {
  const auto p = random_params(16, 4, 5);
  EXPECT_LE(p.w1.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_LE(p.w2.cwiseAbs().maxCoeff(), 1.0 / 8.0);
  EXPECT_LE(p.w3.cwiseAbs().maxCoeff(), 1.0 / 8.0);
  EXPECT_EQ(p.hidden_dim(), 64);
  EXPECT_EQ(p.parameter_count(), 16 * 64 + 64 + 64 * 64 + 64 + 4 * 64 + 4);
}

TEST(mlp_backward, zero_upstream_gives_zero_gradients) {
  const auto p = random_params(4, 2, 2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  const auto f = marl::nn::mlp_forward<double>(p, x);
  const auto g = marl::nn::mlp_backward<double>(p, f.cache, Eigen::MatrixXd::Zero(2, 3));
  EXPECT_TRUE(g.grads.w1.isZero(0));
  EXPECT_TRUE(g.grads.b3.isZero(0));
  EXPECT_TRUE(g.input_grad.isZero(0));
}

TEST(mlp_backward, scalar_chain_rule) {
  // Single active path: w1 = 2, everything else passes the signal through.
  auto p = P::zeros(1, 1, 1);
  p.w1(0, 0) = 2;
  p.w2(0, 0) = 1;
  p.w3(0, 0) = 1;
  Eigen::MatrixXd x(1, 1);
  x << 3;
  const auto f = marl::nn::mlp_forward<double>(p, x);
  EXPECT_DOUBLE_EQ(f.output(0, 0), 6.0);
  const auto g = marl::nn::mlp_backward<double>(p, f.cache, Eigen::MatrixXd::Ones(1, 1));
  EXPECT_DOUBLE_EQ(g.grads.w1(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(g.input_grad(0, 0), 2.0);
}

TEST(mlp_backward, input_gradient_matches_full_backward) {
  const auto p = random_params(5, 3, 4);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 6);
  Eigen::MatrixXd up = Eigen::MatrixXd::Random(3, 6);
  const auto f = marl::nn::mlp_forward<double>(p, x);
  EXPECT_TRUE(marl::nn::mlp_input_gradient<double>(p, f.cache, up)
                  .isApprox(marl::nn::mlp_backward<double>(p, f.cache, up).input_grad, 1e-14));
}

TEST(mlp_backward, rejects_mismatched_upstream) {
  const auto p = random_params(4, 2, 2);
  const auto f = marl::nn::mlp_forward<double>(p, Eigen::MatrixXd::Random(4, 3));
  EXPECT_THROW(marl::nn::mlp_backward<double>(p, f.cache, Eigen::MatrixXd::Zero(1, 3)),
               marl::ShapeError);
  EXPECT_THROW(marl::nn::mlp_backward<double>(p, f.cache, Eigen::MatrixXd::Zero(2, 2)),
               marl::ShapeError);
}

// sum(upstream .* output) is the scalar whose gradient mlp_backward returns.
oracle::FdValue weighted_output(const P& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& up) {
  oracle::FdValue v{0, {}};
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    auto f = oracle::naive_mlp(p, oracle::column(x, c));
    for (Eigen::Index r = 0; r < up.rows(); ++r) v.loss += up(r, c) * f.output[static_cast<std::size_t>(r)];
    v.signature.insert(v.signature.end(), f.mask.begin(), f.mask.end());
  }
  return v;
}

TEST(mlp_backward, parameter_gradients_match_finite_differences) {
  std::size_t checked = 0, skipped = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = random_params(4, 2, seed, seed % 2 ? 64 : 16);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
    Eigen::MatrixXd up = Eigen::MatrixXd::Random(2, 2);
    const auto f = marl::nn::mlp_forward<double>(p, x);
    const auto g = marl::nn::mlp_backward<double>(p, f.cache, up);
    const auto stats = oracle::finite_difference_check(
        p, g.grads, [&] { return weighted_output(p, x, up); }, 1e-5, 1e-4);
    EXPECT_LT(stats.max_rel_err, 1e-6) << "seed " << seed;
    checked += stats.checked;
    skipped += stats.skipped;
  }
  EXPECT_LT(static_cast<double>(skipped), 0.01 * static_cast<double>(checked + skipped));
}

TEST(mlp_backward, input_gradient_matches_finite_differences) {
  const auto p = random_params(4, 2, 77, 16);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 1);
  Eigen::MatrixXd up = Eigen::MatrixXd::Random(2, 1);
  const auto f = marl::nn::mlp_forward<double>(p, x);
  const auto g = marl::nn::mlp_backward<double>(p, f.cache, up);
  for (Eigen::Index k = 0; k < 4; ++k) {
    Eigen::MatrixXd xp = x, xm = x;
    xp(k, 0) += 1e-5;
    xm(k, 0) -= 1e-5;
    const double fd = (weighted_output(p, xp, up).loss - weighted_output(p, xm, up).loss) / 2e-5;
    EXPECT_LT(oracle::rel_err(g.input_grad(k, 0), fd, 1e-4), 1e-6);
  }
}

TEST(adam, zero_gradient_is_identity) {
  auto p = random_params(3, 2, 1);
  const auto before = p;
  auto s = marl::nn::AdamState<double>::for_params(p);
  const auto zero = P::zeros(3, 2);
  for (int k = 0; k < 50; ++k) marl::nn::adam_step(s, p, zero);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.t, 50);
}

TEST(adam, first_step_moves_by_learning_rate) {
  auto p = P::zeros(1, 1, 1);
  auto g = P::zeros(1, 1, 1);
  g.w1(0, 0) = 1.0;
  auto s = marl::nn::AdamState<double>::for_params(p, 0.01);
  marl::nn::adam_step(s, p, g);
  // m_hat = 1, v_hat = 1  ->  step = lr / (1 + eps)
  const double expected = -0.01 / (1.0 + 1e-8);
  EXPECT_NEAR(p.w1(0, 0), expected, 1e-15);
  EXPECT_EQ(s.t, 1);
  EXPECT_EQ(p.b1(0), 0.0);
}

TEST(adam, repeated_positive_gradient_moves_monotonically_negative) {
  auto p = P::zeros(1, 1, 1);
  auto g = P::zeros(1, 1, 1);
  g.w1(0, 0) = 1.0;
  auto s = marl::nn::AdamState<double>::for_params(p);
  marl::nn::adam_step(s, p, g);
  const double first = p.w1(0, 0);
  marl::nn::adam_step(s, p, g);
  EXPECT_LT(first, 0.0);
  EXPECT_LT(p.w1(0, 0), first);
}

TEST(adam, matches_formula_over_several_steps) {
  auto p = P::zeros(1, 1, 1);
  auto s = marl::nn::AdamState<double>::for_params(p, 0.01);
  const double grads[] = {0.5, -1.5, 2.0, 0.25};
  double w = 0, m = 0, v = 0;
  for (int t = 1; t <= 4; ++t) {
    const double gv = grads[t - 1];
    auto g = P::zeros(1, 1, 1);
    g.w1(0, 0) = gv;
    marl::nn::adam_step(s, p, g);
    m = 0.9 * m + 0.1 * gv;
    v = 0.999 * v + 0.001 * gv * gv;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p.w1(0, 0), w, 1e-15);
  }
}

TEST(adam, rejects_non_finite_gradient_without_side_effects) {
  auto p = random_params(2, 1, 3);
  const auto before = p;
  auto s = marl::nn::AdamState<double>::for_params(p);
  auto g = P::zeros(2, 1);
  g.b2(5) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(marl::nn::adam_step(s, p, g), marl::NonFiniteError);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.t, 0);
}

TEST(adam, rejects_shape_mismatch) {
  auto p = random_params(2, 1, 3);
  auto s = marl::nn::AdamState<double>::for_params(p);
  EXPECT_THROW(marl::nn::adam_step(s, p, P::zeros(3, 1)), marl::ShapeError);
}

TEST(soft_update, tau_one_copies_online) {
  auto t = random_params(3, 2, 1);
  const auto o = random_params(3, 2, 2);
  marl::nn::soft_update(t, o, 1.0);
  EXPECT_EQ(t, o);
}

TEST(soft_update, tau_zero_is_noop) {
  auto t = random_params(3, 2, 1);
  const auto before = t;
  marl::nn::soft_update(t, random_params(3, 2, 2), 0.0);
  EXPECT_EQ(t, before);
}

TEST(soft_update, direct_arithmetic) {
  auto t = P::zeros(1, 1, 1);
  auto o = P::zeros(1, 1, 1);
  o.w1(0, 0) = 1.0;
  marl::nn::soft_update(t, o, 0.01);
  EXPECT_DOUBLE_EQ(t.w1(0, 0), 0.01);
}

TEST(soft_update, convex_combination_property) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = random_params(5, 2, seed, 8);
    const auto t0 = t;
    const auto o = random_params(5, 2, seed + 1000, 8);
    std::mt19937_64 tau_rng(seed);
    const double tau = std::uniform_real_distribution<double>(0, 1)(tau_rng);
    marl::nn::soft_update(t, o, tau);
    marl::nn::for_each_tensor(
        [](const auto& now, const auto& before, const auto& online) {
          for (Eigen::Index k = 0; k < now.size(); ++k) {
            const double lo = std::min(before.data()[k], online.data()[k]);
            const double hi = std::max(before.data()[k], online.data()[k]);
            EXPECT_GE(now.data()[k], lo);
            EXPECT_LE(now.data()[k], hi);
          }
        },
        t, t0, o);
  }
}

TEST(soft_update, rejects_tau_outside_unit_interval) {
  auto t = P::zeros(1, 1, 1);
  EXPECT_THROW(marl::nn::soft_update(t, t, 1.5), marl::ParameterError);
  EXPECT_THROW(marl::nn::soft_update(t, t, -0.1), marl::ParameterError);
  EXPECT_THROW(marl::nn::soft_update(t, P::zeros(2, 1, 1), 0.5), marl::ShapeError);
}

TEST(squashed_gaussian, zero_noise_center) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd log_std(2);
  log_std << -0.5, 0.3;
  const auto s = marl::nn::squashed_gaussian_sample<double>(mean, log_std, Eigen::VectorXd::Zero(2));
  EXPECT_TRUE(s.action.isZero(0));
  const double expected = (0.5 - 0.3) - std::log(2 * std::numbers::pi) - 2 * std::log(1 + 1e-6);
  EXPECT_NEAR(s.log_prob, expected, 1e-14);
}

TEST(squashed_gaussian, saturates_at_large_mean) {
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(1, 20.0);
  Eigen::VectorXd log_std = Eigen::VectorXd::Constant(1, -20.0);
  const auto s = marl::nn::squashed_gaussian_sample<double>(mean, log_std, Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(s.action(0), 1.0, 1e-8);
  EXPECT_TRUE(std::isfinite(s.log_prob));
}

TEST(squashed_gaussian, log_prob_matches_change_of_variables) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0, 1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd mean(2), log_std(2), noise(2);
    for (int k = 0; k < 2; ++k) {
      mean(k) = u(rng);
      log_std(k) = u(rng);
      noise(k) = normal(rng);
    }
    const auto s = marl::nn::squashed_gaussian_sample<double>(mean, log_std, noise);
    const double ref = oracle::tanh_gaussian_log_density(
        {s.action(0), s.action(1)}, {mean(0), mean(1)}, {log_std(0), log_std(1)}, 1e-6);
    EXPECT_LT(oracle::rel_err(s.log_prob, ref, 1e-12), 1e-6);
  }
}

TEST(squashed_gaussian, exact_density_integrates_to_one) {
  // Trapezoid quadrature of exp(log density) over (-1, 1) in one dimension.
  const double mean = 0.3, log_std = -0.4;
  const int steps = 200000;
  double total = 0;
  for (int k = 1; k < steps; ++k) {
    const double a = -1.0 + 2.0 * k / steps;
    total += std::exp(oracle::tanh_gaussian_log_density({a}, {mean}, {log_std}, 0.0));
  }
  EXPECT_NEAR(total * 2.0 / steps, 1.0, 1e-6);
}

TEST(squashed_gaussian, log_std_is_clamped) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd noise = Eigen::VectorXd::Constant(1, 0.5);
  const auto hi = marl::nn::squashed_gaussian_sample<double>(mean, Eigen::VectorXd::Constant(1, 9.0), noise);
  const auto at = marl::nn::squashed_gaussian_sample<double>(mean, Eigen::VectorXd::Constant(1, 2.0), noise);
  EXPECT_EQ(hi.action, at.action);
  EXPECT_EQ(hi.log_prob, at.log_prob);
}

TEST(squashed_gaussian, rejects_non_finite_inputs) {
  Eigen::VectorXd ok = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd bad = ok;
  bad(1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(marl::nn::squashed_gaussian_sample<double>(bad, ok, ok), marl::NonFiniteError);
  EXPECT_THROW(marl::nn::squashed_gaussian_sample<double>(ok, ok, bad), marl::NonFiniteError);
  EXPECT_THROW(marl::nn::squashed_gaussian_sample<double>(ok, ok, Eigen::VectorXd::Zero(3)),
               marl::ShapeError);
}

TEST(squashed_gaussian, backward_matches_finite_differences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0, 1);
  const Eigen::Index d = 3, b = 4;
  Eigen::MatrixXd mean = Eigen::MatrixXd::NullaryExpr(d, b, [&] { return normal(rng); });
  Eigen::MatrixXd ls = Eigen::MatrixXd::NullaryExpr(d, b, [&] { return 0.5 * normal(rng); });
  ls(0, 0) = 3.0;  // clamped entry: zero gradient
  const Eigen::MatrixXd noise = Eigen::MatrixXd::NullaryExpr(d, b, [&] { return normal(rng); });
  const Eigen::MatrixXd ga = Eigen::MatrixXd::NullaryExpr(d, b, [&] { return normal(rng); });
  const Eigen::VectorXd glp = Eigen::VectorXd::NullaryExpr(b, [&] { return normal(rng); });
  auto objective = [&](const Eigen::MatrixXd& m, const Eigen::MatrixXd& l) {
    const auto s = marl::nn::squashed_gaussian_batch<double>(m, l, noise);
    return (ga.array() * s.action.array()).sum() + glp.dot(s.log_prob);
  };
  const auto s = marl::nn::squashed_gaussian_batch<double>(mean, ls, noise);
  const auto g = marl::nn::squashed_gaussian_backward<double>(ls, noise, s.action, ga, glp);
  const double eps = 1e-6;
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    Eigen::MatrixXd mp = mean, mm = mean, lp = ls, lm = ls;
    mp.data()[k] += eps;
    mm.data()[k] -= eps;
    lp.data()[k] += eps;
    lm.data()[k] -= eps;
    const double fd_mean = (objective(mp, ls) - objective(mm, ls)) / (2 * eps);
    const double fd_ls = (objective(mean, lp) - objective(mean, lm)) / (2 * eps);
    EXPECT_LT(oracle::rel_err(g.d_mean.data()[k], fd_mean, 1e-4), 1e-6) << k;
    EXPECT_LT(oracle::rel_err(g.d_log_std.data()[k], fd_ls, 1e-4), 1e-6) << k;
  }
  EXPECT_EQ(g.d_log_std(0, 0), 0.0);
}

TEST(serialize, round_trip_is_exact) {
  const auto p = random_params(7, 3, 11, 16);
  const auto bytes = marl::nn::to_bytes(p);
  EXPECT_EQ(bytes.size(), 4 + 3 * 4 + 3 * 8 + static_cast<std::size_t>(p.parameter_count()) * 8);
  EXPECT_EQ(marl::nn::from_bytes<double>(bytes), p);
}

TEST(serialize, file_round_trip) {
  const auto p = random_params(2, 2, 12, 8);
  const auto path = std::filesystem::temp_directory_path() / "marl_test_mlp.bin";
  marl::nn::save_mlp(path, p);
  EXPECT_EQ(marl::nn::load_mlp<double>(path), p);
  std::filesystem::remove(path);
}

TEST(serialize, header_is_little_endian) {
  const auto bytes = marl::nn::to_bytes(P::zeros(5, 1, 2));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MLPB");
  EXPECT_EQ(bytes[4], 1);  // version
  EXPECT_EQ(bytes[8], 8);  // scalar bytes
  EXPECT_EQ(bytes[16], 5);  // input dim
}

TEST(serialize, rejects_corrupt_blobs) {
  auto bytes = marl::nn::to_bytes(P::zeros(2, 1, 2));
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(marl::nn::from_bytes<double>(truncated), marl::ShapeError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(marl::nn::from_bytes<double>(trailing), marl::ShapeError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(marl::nn::from_bytes<double>(magic), marl::ShapeError);
  EXPECT_THROW(marl::nn::from_bytes<float>(bytes), marl::ShapeError);
}

TEST(mlp_forward, single_precision_instantiation) {
  std::mt19937_64 rng(1);
  const auto p = marl::nn::init_mlp<float>(3, 2, rng, 8);
  Eigen::MatrixXf x = Eigen::MatrixXf::Random(3, 2);
  const auto f = marl::nn::mlp_forward<float>(p, x);
  const auto g = marl::nn::mlp_backward<float>(p, f.cache, Eigen::MatrixXf::Ones(2, 2));
  EXPECT_TRUE(g.grads.all_finite());
}

}  // namespace
