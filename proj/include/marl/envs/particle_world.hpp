#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marl/types.hpp"

namespace marl::envs {

enum class Scenario { CoopNav, PredatorPrey };
enum class EntityKind { Learner, Prey, Landmark };

std::string_view to_string(Scenario s);
std::string_view to_string(EntityKind k);
Scenario parse_scenario(std::string_view name);

// Physics and reward constants are round-number defaults; every one of them
// is overridable.
struct EnvConfig {
  Scenario scenario = Scenario::CoopNav;
  int n_learners = 3;
  int n_prey = 0;
  int n_landmarks = 3;
  Real dt = 0.1;
  Real damping = 0.25;
  Real max_speed = 1.0;
  int max_episode_length = 25;
  Real world_halfwidth = 1.0;
  Real agent_radius = 0.05;
  Real landmark_radius = 0.05;
  Real collision_penalty = 1.0;
  Real tag_reward = 10.0;
  Real distance_shaping = 0.1;
  std::uint64_t seed = 0;

  static EnvConfig coop_nav(int agents, int landmarks);
  static EnvConfig predator_prey(int predators, int prey = 1, int landmarks = 0);

  // Throws ParameterError on any violated invariant.
  void validate() const;
};

struct Entity {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Real radius = 0.05;
  EntityKind kind = EntityKind::Learner;

  bool movable() const { return kind != EntityKind::Landmark; }
};

// Entities are ordered learners, then prey, then landmarks.
struct WorldState {
  std::vector<Entity> entities;
  int n_learners = 0;
  int n_prey = 0;
  int n_landmarks = 0;
  int step_count = 0;
  std::size_t clamped_actions = 0;

  std::size_t prey_begin() const { return static_cast<std::size_t>(n_learners); }
  std::size_t landmark_begin() const { return static_cast<std::size_t>(n_learners + n_prey); }

  bool operator==(const WorldState& o) const;
};

bool overlaps(const Entity& a, const Entity& b);

// own velocity (2) ++ own position (2) ++ landmarks (2L) ++ other movers (2(N+M-1))
int observation_dim(const EnvConfig& config);

struct ResetResult {
  WorldState state;
  std::vector<Vector> observations;
};

struct StepResult {
  std::vector<Vector> observations;
  Vector rewards;
  bool done = false;
};

ResetResult reset(const EnvConfig& config, Rng& rng);

// Advances one tick. Learner actions outside [-1, 1] are clamped and counted
// in state.clamped_actions.
StepResult step(WorldState& state, std::span<const Vec2> actions, const EnvConfig& config);

std::vector<Vector> observe(const WorldState& state);

// Unit vector away from the nearest learner (predator); ties go to the
// lowest entity index. Zero when there is no predator or it sits on the prey.
Vec2 prey_policy(const WorldState& state, std::size_t entity_index);

Vector compute_rewards(const WorldState& state, const EnvConfig& config);

}  // namespace marl::envs
