#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "marl/envs/particle_world.hpp"
#include "marl/profiler/profiler.hpp"
#include "marl/trainers/agent.hpp"

namespace marl::trainers {

struct AgentLosses {
  Real q_loss = 0;
  Real p_loss = 0;
};

struct UpdateCounters {
  std::int64_t rounds = 0;        // update_all_trainers invocations
  std::int64_t skipped = 0;       // rounds refused by the buffer-size guard
  std::int64_t sampler_fallbacks = 0;
  std::uint64_t sequence = 0;     // monotone stamp source for AgentBundle
};

// One round: for each agent in index order sample -> target Q -> critic
// step -> actor step, then soft-update every target. Returns nullopt (and
// counts a skip) while buffers are too short for the configured sampler.
std::optional<std::vector<AgentLosses>> update_all_trainers(std::vector<AgentBundle>& agents,
                                                            const TrainerConfig& config, Rng& rng,
                                                            profiler::ProfileReport& report,
                                                            UpdateCounters& counters);

// Appends one environment step to every agent's buffer.
void store_step(std::vector<AgentBundle>& agents, const std::vector<Vector>& obs,
                const std::vector<Vector>& actions, const Vector& rewards,
                const std::vector<Vector>& next_obs, bool done);

struct EpisodeStats {
  int episode = 0;
  std::vector<Real> agent_rewards;
  Real mean_reward = 0;
  double wall_ms = 0;
};

struct TrainingResult {
  std::vector<EpisodeStats> stats;
  profiler::ProfileReport profile;
  std::vector<AgentBundle> agents;
  UpdateCounters counters;
};

using EpisodeCallback = std::function<void(const EpisodeStats&)>;

TrainingResult run_training(const TrainerConfig& config, const envs::EnvConfig& env_config,
                            const EpisodeCallback& on_episode = {});

// sum_t gamma^t r_t
Real discounted_return(std::span<const Real> rewards, Real gamma);

}  // namespace marl::trainers
