#include "marl/trainers/agent.hpp"

#include <numeric>
#include <string>

#include "marl/errors.hpp"

namespace marl::trainers {

Eigen::Index critic_input_dim(std::span<const Eigen::Index> obs_dims, Eigen::Index act_dim) {
  const Eigen::Index obs = std::accumulate(obs_dims.begin(), obs_dims.end(), Eigen::Index{0});
  return obs + act_dim * static_cast<Eigen::Index>(obs_dims.size());
}

std::int64_t critic_parameter_count(std::int64_t n, std::int64_t obs_dim, std::int64_t act_dim,
                                    std::int64_t h) {
  const std::int64_t in = n * (obs_dim + act_dim);
  return n * (in * h + h + h * h + h + h + 1);
}

std::vector<AgentBundle> make_agents(std::span<const Eigen::Index> obs_dims, Eigen::Index act_dim,
                                     const TrainerConfig& config, Rng& rng) {
  const Eigen::Index critic_in = critic_input_dim(obs_dims, act_dim);
  const Eigen::Index actor_out = config.algorithm == Algorithm::Masac ? 2 * act_dim : act_dim;
  std::vector<AgentBundle> agents;
  agents.reserve(obs_dims.size());
  for (const Eigen::Index obs_dim : obs_dims) {
    auto actor = nn::init_mlp<Real>(obs_dim, actor_out, rng, config.hidden);
    auto critic = nn::init_mlp<Real>(critic_in, 1, rng, config.hidden);
    AgentBundle a{actor,
                  critic,
                  actor,
                  critic,
                  Adam::for_params(actor, config.lr),
                  Adam::for_params(critic, config.lr),
                  replay::ReplayBuffer(config.buffer_capacity),
                  obs_dim,
                  act_dim};
    agents.push_back(std::move(a));
  }
  return agents;
}

PolicyForward policy_forward(const Params& actor, const Matrix& obs, Algorithm algo,
                             const Matrix* noise) {
  PolicyForward out;
  auto fw = nn::mlp_forward<Real>(actor, obs);
  out.cache = std::move(fw.cache);
  out.head = std::move(fw.output);
  if (algo == Algorithm::Maddpg) {
    out.action = out.head.array().tanh().matrix();
    return out;
  }
  const Eigen::Index d = out.head.rows() / 2;
  const Matrix mean = out.head.topRows(d);
  if (noise == nullptr) {
    out.action = mean.array().tanh().matrix();
    return out;
  }
  auto s = nn::squashed_gaussian_batch<Real>(mean, out.head.bottomRows(d), *noise);
  out.action = std::move(s.action);
  out.log_prob = std::move(s.log_prob);
  return out;
}

Vector select_action(const AgentBundle& bundle, const Vector& obs, bool explore, Rng& rng,
                     const TrainerConfig& config) {
  if (obs.size() != bundle.actor.input_dim()) {
    throw ShapeError("select_action: observation has " + std::to_string(obs.size()) +
                     " entries, actor expects " + std::to_string(bundle.actor.input_dim()));
  }
  std::normal_distribution<Real> normal(0, 1);
  const Eigen::Index d = bundle.act_dim;
  Vector action;
  if (config.algorithm == Algorithm::Maddpg) {
    action = nn::mlp_apply<Real>(bundle.actor, obs).col(0).array().tanh().matrix();
    if (explore) {
      for (Eigen::Index k = 0; k < d; ++k) action(k) += config.exploration_sigma * normal(rng);
    }
  } else if (explore) {
    Matrix noise(d, 1);
    for (Eigen::Index k = 0; k < d; ++k) noise(k, 0) = normal(rng);
    action = policy_forward(bundle.actor, obs, Algorithm::Masac, &noise).action.col(0);
  } else {
    action = policy_forward(bundle.actor, obs, Algorithm::Masac, nullptr).action.col(0);
  }
  return action.cwiseMax(Real(-1)).cwiseMin(Real(1));
}

Matrix joint_input(std::span<const BatchArrays> batches, bool next_obs,
                   std::span<const Matrix> actions) {
  if (batches.empty()) throw ShapeError("joint_input: no batches");
  if (!actions.empty() && actions.size() != batches.size()) {
    throw ShapeError("joint_input: one action matrix per agent required");
  }
  const Eigen::Index b = batches.front().size();
  Eigen::Index rows = 0;
  for (std::size_t j = 0; j < batches.size(); ++j) {
    if (batches[j].size() != b) throw AlignmentError("joint_input: batch sizes differ");
    rows += batches[j].obses_t.rows();
    rows += actions.empty() ? batches[j].actions.rows() : actions[j].rows();
  }
  Matrix x(rows, b);
  Eigen::Index off = 0;
  for (const auto& batch : batches) {
    const Matrix& o = next_obs ? batch.obses_tp1 : batch.obses_t;
    x.middleRows(off, o.rows()) = o;
    off += o.rows();
  }
  for (std::size_t j = 0; j < batches.size(); ++j) {
    const Matrix& a = actions.empty() ? batches[j].actions : actions[j];
    if (a.cols() != b) throw ShapeError("joint_input: action batch width mismatch");
    x.middleRows(off, a.rows()) = a;
    off += a.rows();
  }
  return x;
}

Vector target_y(const Vector& rewards, const Vector& dones, const Vector& q_next, Real gamma) {
  if (rewards.size() != dones.size() || rewards.size() != q_next.size()) {
    throw ShapeError("target_y: rewards, dones and q_next lengths differ");
  }
  return (rewards.array() + gamma * (Real(1) - dones.array()) * q_next.array()).matrix();
}

TargetQ target_q_calculation(std::span<const AgentBundle> agents,
                             std::span<const BatchArrays> batches, std::size_t agent_i,
                             Algorithm algo, std::span<const Matrix> noise) {
  if (agents.size() != batches.size()) {
    throw AlignmentError("target_q_calculation: one batch per agent required");
  }
  if (agent_i >= agents.size()) throw IndexError("target_q_calculation: agent index out of range");
  const bool stochastic = algo == Algorithm::Masac && !noise.empty();
  if (stochastic && noise.size() != agents.size()) {
    throw ShapeError("target_q_calculation: one noise matrix per agent required");
  }
  TargetQ out;
  std::vector<Matrix> next_actions(agents.size());
  for (std::size_t j = 0; j < agents.size(); ++j) {
    auto pf = policy_forward(agents[j].target_actor, batches[j].obses_tp1, algo,
                             stochastic ? &noise[j] : nullptr);
    next_actions[j] = std::move(pf.action);
    if (j == agent_i && stochastic) out.next_log_prob = std::move(pf.log_prob);
  }
  const Matrix x = joint_input(batches, true, next_actions);
  out.q_next = nn::mlp_apply<Real>(agents[agent_i].target_critic, x).row(0).transpose();
  return out;
}

LossGrad critic_loss_and_grad(const Params& critic, const Matrix& x, const Vector& y) {
  if (x.cols() != y.size()) throw ShapeError("critic loss: batch and target sizes differ");
  const auto fw = nn::mlp_forward<Real>(critic, x);
  const Matrix diff = fw.output - y.transpose();
  const Real b = static_cast<Real>(y.size());
  LossGrad out;
  out.loss = diff.squaredNorm() / b;
  out.grads = nn::mlp_backward<Real>(critic, fw.cache, (Real(2) / b) * diff).grads;
  return out;
}

namespace {

Eigen::Index action_offset(std::span<const BatchArrays> batches, std::size_t agent_i) {
  Eigen::Index off = 0;
  for (const auto& b : batches) off += b.obses_t.rows();
  for (std::size_t j = 0; j < agent_i; ++j) off += batches[j].actions.rows();
  return off;
}

}  // namespace

LossGrad actor_loss_and_grad(const Params& actor, const Params& critic,
                             std::span<const BatchArrays> batches, std::size_t agent_i,
                             Algorithm algo, Real alpha, const Matrix* noise) {
  if (agent_i >= batches.size()) throw IndexError("actor loss: agent index out of range");
  if (algo == Algorithm::Masac && noise == nullptr) {
    throw ParameterError("actor loss: stochastic actor needs reparameterization noise");
  }
  const auto& own = batches[agent_i];
  const Real b = static_cast<Real>(own.size());
  const Eigen::Index d = own.actions.rows();

  auto pf = policy_forward(actor, own.obses_t, algo, noise);
  Matrix x = joint_input(batches, false);
  const Eigen::Index slot = action_offset(batches, agent_i);
  x.middleRows(slot, d) = pf.action;

  const auto fw_c = nn::mlp_forward<Real>(critic, x);
  const Matrix upstream_q = Matrix::Constant(1, own.size(), Real(-1) / b);
  const Matrix grad_x = nn::mlp_input_gradient<Real>(critic, fw_c.cache, upstream_q);
  const Matrix grad_action = grad_x.middleRows(slot, d);

  LossGrad out;
  Matrix upstream_head;
  if (algo == Algorithm::Maddpg) {
    out.loss = -fw_c.output.mean();
    upstream_head = grad_action.cwiseProduct(
        (Real(1) - pf.action.array().square()).matrix());
  } else {
    out.loss = (alpha * pf.log_prob.sum() - fw_c.output.sum()) / b;
    const Vector upstream_lp = Vector::Constant(own.size(), alpha / b);
    auto g = nn::squashed_gaussian_backward<Real>(pf.head.bottomRows(d), *noise, pf.action,
                                                  grad_action, upstream_lp);
    upstream_head.resize(2 * d, own.size());
    upstream_head.topRows(d) = g.d_mean;
    upstream_head.bottomRows(d) = g.d_log_std;
  }
  out.grads = nn::mlp_backward<Real>(actor, pf.cache, upstream_head).grads;
  return out;
}

Real critic_update(AgentBundle& agent, std::span<const BatchArrays> batches, const Vector& y) {
  const Matrix x = joint_input(batches, false);
  auto lg = critic_loss_and_grad(agent.critic, x, y);
  if (!std::isfinite(lg.loss)) throw NonFiniteError("critic loss is not finite");
  nn::adam_step(agent.critic_opt, agent.critic, lg.grads);
  return lg.loss;
}

Real actor_update(AgentBundle& agent, std::span<const BatchArrays> batches, std::size_t agent_i,
                  Algorithm algo, Real alpha, const Matrix* noise) {
  auto lg = actor_loss_and_grad(agent.actor, agent.critic, batches, agent_i, algo, alpha, noise);
  if (!std::isfinite(lg.loss)) throw NonFiniteError("actor loss is not finite");
  nn::adam_step(agent.actor_opt, agent.actor, lg.grads);
  return lg.loss;
}

}  // namespace marl::trainers
