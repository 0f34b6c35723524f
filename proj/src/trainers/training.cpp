#include "marl/trainers/training.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "marl/errors.hpp"
#include "marl/replay/sampling.hpp"

namespace marl::trainers {

using profiler::PhaseId;

std::string_view to_string(Algorithm a) {
  return a == Algorithm::Maddpg ? "maddpg" : "masac";
}

std::string_view to_string(SamplerKind s) {
  return s == SamplerKind::Uniform ? "uniform" : "neighbor";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "maddpg") return Algorithm::Maddpg;
  if (s == "masac") return Algorithm::Masac;
  throw ParameterError("unknown algorithm '" + std::string(s) + "'");
}

SamplerKind parse_sampler(std::string_view s) {
  if (s == "uniform") return SamplerKind::Uniform;
  if (s == "neighbor") return SamplerKind::Neighbor;
  throw ParameterError("unknown sampler '" + std::string(s) + "'");
}

void TrainerConfig::validate() const {
  if (!(gamma > 0 && gamma < 1)) throw ParameterError("gamma must lie in (0, 1)");
  if (!(tau > 0 && tau <= 1)) throw ParameterError("tau must lie in (0, 1]");
  if (!(lr > 0)) throw ParameterError("lr must be > 0");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (update_every < 1) throw ParameterError("update_every must be >= 1");
  if (buffer_capacity < 1) throw ParameterError("buffer_capacity must be >= 1");
  if (neighbors < 1) throw ParameterError("neighbors must be >= 1");
  if (episodes < 0) throw ParameterError("episodes must be >= 0");
  if (hidden < 1) throw ParameterError("hidden must be >= 1");
  if (entropy_alpha < 0) throw ParameterError("entropy_alpha must be >= 0");
  if (exploration_sigma < 0) throw ParameterError("exploration_sigma must be >= 0");
}

replay::Sampler TrainerConfig::make_sampler() const {
  if (sampler == SamplerKind::Neighbor) return replay::NeighborSampler{neighbors};
  return replay::UniformSampler{};
}

namespace {

std::vector<Matrix> standard_normal(std::size_t count, Eigen::Index rows, Eigen::Index cols,
                                    Rng& rng) {
  std::normal_distribution<Real> normal(0, 1);
  std::vector<Matrix> out(count, Matrix(rows, cols));
  for (auto& m : out) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
  }
  return out;
}

}  // namespace

std::optional<std::vector<AgentLosses>> update_all_trainers(std::vector<AgentBundle>& agents,
                                                            const TrainerConfig& config, Rng& rng,
                                                            profiler::ProfileReport& report,
                                                            UpdateCounters& counters) {
  counters.rounds += 1;
  const replay::Sampler sampler = config.make_sampler();
  const std::size_t len = agents.empty() ? 0 : agents.front().buffer.size();
  if (agents.empty() || len < replay::min_buffer_len(sampler, config.batch_size)) {
    counters.skipped += 1;
    return std::nullopt;
  }

  auto round_scope = profiler::phase_scope(report, PhaseId::UpdateAllTrainers);
  std::vector<const replay::ReplayBuffer*> buffers;
  for (const auto& a : agents) buffers.push_back(&a.buffer);

  const bool masac = config.algorithm == Algorithm::Masac;
  const auto b = static_cast<Eigen::Index>(config.batch_size);
  std::vector<AgentLosses> losses(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    std::vector<BatchArrays> batches;
    {
      auto s = profiler::phase_scope(report, PhaseId::MiniBatchSampling);
      replay::SampleIndexSet idx;
      try {
        idx = replay::sample_indices(sampler, rng, len, config.batch_size);
      } catch (const InsufficientDataError&) {
        counters.sampler_fallbacks += 1;
        idx = replay::make_index_uniform(rng, config.batch_size, len);
      }
      batches = replay::collect_joint(buffers, idx);
    }

    Vector y;
    {
      auto s = profiler::phase_scope(report, PhaseId::TargetQCalc);
      std::vector<Matrix> noise;
      if (masac) noise = standard_normal(agents.size(), agents.front().act_dim, b, rng);
      auto tq = target_q_calculation(agents, batches, i, config.algorithm, noise);
      Vector q_next = masac ? Vector(tq.q_next - config.entropy_alpha * tq.next_log_prob)
                            : std::move(tq.q_next);
      y = target_y(batches[i].rewards, batches[i].dones, q_next, config.gamma);
    }

    try {
      {
        auto s = profiler::phase_scope(report, PhaseId::QLoss);
        losses[i].q_loss = critic_update(agents[i], batches, y);
        agents[i].last_critic_step = ++counters.sequence;
      }
      {
        auto s = profiler::phase_scope(report, PhaseId::PLoss);
        Matrix noise;
        if (masac) noise = standard_normal(1, agents[i].act_dim, b, rng).front();
        losses[i].p_loss = actor_update(agents[i], batches, i, config.algorithm,
                                        config.entropy_alpha, masac ? &noise : nullptr);
        agents[i].last_actor_step = ++counters.sequence;
      }
    } catch (const NonFiniteError& e) {
      throw NonFiniteError(std::string(e.what()) + " (agent " + std::to_string(i) +
                           ", update round " + std::to_string(counters.rounds) + ")");
    }
  }

  for (auto& a : agents) {
    nn::soft_update(a.target_actor, a.actor, config.tau);
    nn::soft_update(a.target_critic, a.critic, config.tau);
    a.last_target_update = ++counters.sequence;
  }
  return losses;
}

void store_step(std::vector<AgentBundle>& agents, const std::vector<Vector>& obs,
                const std::vector<Vector>& actions, const Vector& rewards,
                const std::vector<Vector>& next_obs, bool done) {
  if (obs.size() != agents.size() || actions.size() != agents.size() ||
      next_obs.size() != agents.size() || static_cast<std::size_t>(rewards.size()) != agents.size()) {
    throw ShapeError("store_step: one record per agent required");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].buffer.add({obs[i], actions[i], rewards(static_cast<Eigen::Index>(i)), next_obs[i], done});
  }
}

TrainingResult run_training(const TrainerConfig& config, const envs::EnvConfig& env_config,
                            const EpisodeCallback& on_episode) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  env_config.validate();
  const auto run_start = Clock::now();

  TrainingResult result;
  auto& report = result.profile;
  report.meta.scenario = std::string(envs::to_string(env_config.scenario));
  report.meta.algorithm = std::string(to_string(config.algorithm));
  report.meta.sampler = std::string(to_string(config.sampler));
  report.meta.n_agents = env_config.n_learners;
  report.meta.seed = config.seed;
  report.meta.episodes = config.episodes;

  Rng env_rng = make_rng(env_config.seed, 1);
  Rng init_rng = make_rng(config.seed, 2);
  Rng train_rng = make_rng(config.seed, 3);
  Rng explore_rng = make_rng(config.seed, 4);

  constexpr Eigen::Index kActDim = 2;
  const auto n = static_cast<std::size_t>(env_config.n_learners);
  const std::vector<Eigen::Index> obs_dims(n, envs::observation_dim(env_config));
  auto& agents = result.agents;
  agents = make_agents(obs_dims, kActDim, config, init_rng);

  std::uint64_t inserts = 0;
  std::vector<Vector> actions(n);
  std::vector<Vec2> forces(n);
  for (int ep = 0; ep < config.episodes; ++ep) {
    const auto ep_start = Clock::now();
    auto [state, obs] = envs::reset(env_config, env_rng);
    EpisodeStats stats;
    stats.episode = ep;
    stats.agent_rewards.assign(n, Real(0));
    bool done = false;
    while (!done) {
      {
        auto s = profiler::phase_scope(report, PhaseId::ActionSelection);
        for (std::size_t i = 0; i < n; ++i) {
          actions[i] = select_action(agents[i], obs[i], true, explore_rng, config);
          forces[i] = actions[i].head<2>();
        }
      }
      envs::StepResult step;
      {
        auto s = profiler::phase_scope(report, PhaseId::EnvStep);
        step = envs::step(state, forces, env_config);
      }
      {
        auto s = profiler::phase_scope(report, PhaseId::ExperienceCollection);
        const bool stored_done = step.done && config.mask_time_limit_dones;
        store_step(agents, obs, actions, step.rewards, step.observations, stored_done);
      }
      for (std::size_t i = 0; i < n; ++i) stats.agent_rewards[i] += step.rewards(static_cast<Eigen::Index>(i));
      obs = std::move(step.observations);
      done = step.done;
      if (++inserts % config.update_every == 0) {
        update_all_trainers(agents, config, train_rng, report, result.counters);
      }
    }
    Real sum = 0;
    for (Real r : stats.agent_rewards) sum += r;
    stats.mean_reward = sum / static_cast<Real>(n);
    stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - ep_start).count();
    if (on_episode) on_episode(stats);
    result.stats.push_back(std::move(stats));
  }

  report.meta.update_rounds = result.counters.rounds - result.counters.skipped;
  report.meta.skipped_updates = result.counters.skipped;
  report.meta.sampler_fallbacks = result.counters.sampler_fallbacks;
  report.set_total_ns(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - run_start).count());
  return result;
}

Real discounted_return(std::span<const Real> rewards, Real gamma) {
  Real total = 0;
  Real discount = 1;
  for (Real r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total;
}

}  // namespace marl::trainers
