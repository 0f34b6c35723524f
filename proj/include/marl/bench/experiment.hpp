#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "marl/envs/particle_world.hpp"
#include "marl/trainers/training.hpp"

namespace marl::bench {

inline constexpr int kSpecSchemaVersion = 1;

// One experiment: a trainer/environment configuration run for every agent
// count in `sweep` and every seed in [seed, seed + repetitions).
struct ExperimentSpec {
  trainers::TrainerConfig trainer;
  envs::EnvConfig env;  // n_learners is taken from the sweep
  std::optional<int> landmarks;  // default: N for coop-nav, 0 for predator-prey
  std::vector<int> sweep{3, 6, 12};
  int repetitions = 1;
  std::filesystem::path out_dir = "runs";
  int jobs = 1;
  bool checkpoints = true;

  void validate() const;
  envs::EnvConfig env_for(int n_learners, std::uint64_t seed) const;
  trainers::TrainerConfig trainer_for(std::uint64_t seed) const;
};

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);

struct RunArtifacts {
  std::filesystem::path dir;
  int n_agents = 0;
  std::uint64_t seed = 0;
};

std::string cell_name(int n_agents, std::uint64_t seed);

// Trains one (agent count, seed) cell and writes
//   stats.csv     episode,mean_episode_reward,agent_0..agent_{N-1},wall_ms
//   profile.json  profile.csv  run.json  checkpoints/
// into out_dir/cell_name. Stats rows are flushed per episode so a failed run
// keeps its prefix; run.json then records status "failed".
RunArtifacts run_cell(const ExperimentSpec& spec, int n_agents, std::uint64_t seed);

// Every cell of the sweep, optionally on `jobs` worker threads.
std::vector<RunArtifacts> cmd_train(const ExperimentSpec& spec);

void write_checkpoints(const std::filesystem::path& dir,
                       const std::vector<trainers::AgentBundle>& agents);

}  // namespace marl::bench
