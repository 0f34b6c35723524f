#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "marl/nn.hpp"
#include "marl/replay/replay_buffer.hpp"
#include "marl/trainers/config.hpp"

namespace marl::trainers {

using Params = nn::MlpParams<Real>;
using Grads = nn::MlpGrads<Real>;
using Adam = nn::AdamState<Real>;
using replay::BatchArrays;

struct AgentBundle {
  Params actor;
  Params critic;
  Params target_actor;
  Params target_critic;
  Adam actor_opt;
  Adam critic_opt;
  replay::ReplayBuffer buffer;
  Eigen::Index obs_dim = 0;
  Eigen::Index act_dim = 0;

  // Update-sequence stamps of the latest critic step, actor step and target
  // soft-update; 0 until the first occurrence.
  std::uint64_t last_critic_step = 0;
  std::uint64_t last_actor_step = 0;
  std::uint64_t last_target_update = 0;
};

// Critic input width: sum of every agent's observation and action widths.
Eigen::Index critic_input_dim(std::span<const Eigen::Index> obs_dims, Eigen::Index act_dim);

// Total critic parameters over all agents for homogeneous observation widths.
std::int64_t critic_parameter_count(std::int64_t n_agents, std::int64_t obs_dim,
                                    std::int64_t act_dim, std::int64_t hidden);

// Online networks are freshly initialized; targets start as exact copies.
std::vector<AgentBundle> make_agents(std::span<const Eigen::Index> obs_dims, Eigen::Index act_dim,
                                     const TrainerConfig& config, Rng& rng);

struct PolicyForward {
  Matrix action;    // act_dim x b, in [-1, 1]
  Vector log_prob;  // stochastic heads only
  nn::MlpCache<Real> cache;
  Matrix head;      // raw network output
};

// Deterministic head: tanh(actor(obs)). Stochastic head (MASAC): squashed
// Gaussian with the given standard-normal noise, or tanh(mean) without noise.
PolicyForward policy_forward(const Params& actor, const Matrix& obs, Algorithm algo,
                             const Matrix* noise);

// Local action for one agent, clamped to [-1, 1].
Vector select_action(const AgentBundle& bundle, const Vector& obs, bool explore, Rng& rng,
                     const TrainerConfig& config);

// Stacks [obs_0; ...; obs_{N-1}; act_0; ...; act_{N-1}] per record.
Matrix joint_input(std::span<const BatchArrays> batches, bool next_obs,
                   std::span<const Matrix> actions = {});

// y_k = r_k + gamma * (1 - done_k) * q_next_k
Vector target_y(const Vector& rewards, const Vector& dones, const Vector& target_q_next, Real gamma);

struct TargetQ {
  Vector q_next;
  Vector next_log_prob;  // agent i's log pi(a'_i | o'_i); empty for MADDPG
};

// Next actions from every agent's target actor, concatenated with all next
// observations and scored by agent i's target critic. `noise` holds one
// standard-normal matrix per agent for stochastic heads; empty otherwise.
TargetQ target_q_calculation(std::span<const AgentBundle> agents,
                             std::span<const BatchArrays> batches, std::size_t agent_i,
                             Algorithm algo, std::span<const Matrix> noise = {});

struct LossGrad {
  Real loss = 0;
  Grads grads;
};

// Mean squared error (1/b) sum (Q(x_k) - y_k)^2 and its parameter gradient.
LossGrad critic_loss_and_grad(const Params& critic, const Matrix& x, const Vector& y);

// MADDPG: -(1/b) sum Q(..., pi_i(o_i), ...).
// MASAC:  (1/b) sum [alpha log pi_i(a~_i|o_i) - Q(..., a~_i, ...)].
// Only agent i's action slot is replaced; other actions come from the batch.
LossGrad actor_loss_and_grad(const Params& actor, const Params& critic,
                             std::span<const BatchArrays> batches, std::size_t agent_i,
                             Algorithm algo, Real alpha, const Matrix* noise);

Real critic_update(AgentBundle& agent, std::span<const BatchArrays> batches, const Vector& y);
Real actor_update(AgentBundle& agent, std::span<const BatchArrays> batches, std::size_t agent_i,
                  Algorithm algo, Real alpha, const Matrix* noise);

}  // namespace marl::trainers
