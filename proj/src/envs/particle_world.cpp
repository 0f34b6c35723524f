#include "marl/envs/particle_world.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "marl/errors.hpp"

namespace marl::envs {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::CoopNav: return "coop-nav";
    case Scenario::PredatorPrey: return "predator-prey";
  }
  return "unknown";
}

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Learner: return "learner";
    case EntityKind::Prey: return "prey";
    case EntityKind::Landmark: return "landmark";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "coop-nav") return Scenario::CoopNav;
  if (name == "predator-prey") return Scenario::PredatorPrey;
  throw ParameterError("unknown scenario '" + std::string(name) + "'");
}

EnvConfig EnvConfig::coop_nav(int agents, int landmarks) {
  EnvConfig c;
  c.scenario = Scenario::CoopNav;
  c.n_learners = agents;
  c.n_prey = 0;
  c.n_landmarks = landmarks;
  return c;
}

EnvConfig EnvConfig::predator_prey(int predators, int prey, int landmarks) {
  EnvConfig c;
  c.scenario = Scenario::PredatorPrey;
  c.n_learners = predators;
  c.n_prey = prey;
  c.n_landmarks = landmarks;
  return c;
}

void EnvConfig::validate() const {
  if (n_learners < 1) throw ParameterError("n_learners must be >= 1");
  if (n_prey < 0 || n_landmarks < 0) throw ParameterError("entity counts must be >= 0");
  if (scenario == Scenario::CoopNav && n_prey != 0) {
    throw ParameterError("coop-nav has no prey");
  }
  if (max_episode_length < 1) throw ParameterError("max_episode_length must be >= 1");
  if (!(dt > 0)) throw ParameterError("dt must be > 0");
  if (!(damping >= 0 && damping < 1)) throw ParameterError("damping must lie in [0, 1)");
  if (!(max_speed > 0)) throw ParameterError("max_speed must be > 0");
  if (!(world_halfwidth > 0)) throw ParameterError("world_halfwidth must be > 0");
}

bool WorldState::operator==(const WorldState& o) const {
  if (entities.size() != o.entities.size() || step_count != o.step_count ||
      n_learners != o.n_learners || n_prey != o.n_prey || n_landmarks != o.n_landmarks) {
    return false;
  }
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& a = entities[i];
    const auto& b = o.entities[i];
    if (a.position != b.position || a.velocity != b.velocity || a.radius != b.radius ||
        a.kind != b.kind) {
      return false;
    }
  }
  return true;
}

bool overlaps(const Entity& a, const Entity& b) {
  return (a.position - b.position).norm() < a.radius + b.radius;
}

int observation_dim(const EnvConfig& c) {
  return 2 + 2 + 2 * c.n_landmarks + 2 * (c.n_learners + c.n_prey - 1);
}

ResetResult reset(const EnvConfig& config, Rng& rng) {
  config.validate();
  std::uniform_real_distribution<Real> coord(-config.world_halfwidth, config.world_halfwidth);
  ResetResult r;
  auto& s = r.state;
  s.n_learners = config.n_learners;
  s.n_prey = config.n_prey;
  s.n_landmarks = config.n_landmarks;
  s.entities.resize(static_cast<std::size_t>(config.n_learners + config.n_prey + config.n_landmarks));
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    auto& e = s.entities[i];
    if (i < s.prey_begin()) {
      e.kind = EntityKind::Learner;
      e.radius = config.agent_radius;
    } else if (i < s.landmark_begin()) {
      e.kind = EntityKind::Prey;
      e.radius = config.agent_radius;
    } else {
      e.kind = EntityKind::Landmark;
      e.radius = config.landmark_radius;
    }
    const Real x = coord(rng);
    const Real y = coord(rng);
    e.position = Vec2(x, y);
    e.velocity.setZero();
  }
  r.observations = observe(s);
  return r;
}

std::vector<Vector> observe(const WorldState& s) {
  const int n_movers = s.n_learners + s.n_prey;
  const int dim = 4 + 2 * s.n_landmarks + 2 * (n_movers - 1);
  std::vector<Vector> obs;
  obs.reserve(static_cast<std::size_t>(s.n_learners));
  for (int i = 0; i < s.n_learners; ++i) {
    const auto& self = s.entities[static_cast<std::size_t>(i)];
    Vector o(dim);
    o.segment<2>(0) = self.velocity;
    o.segment<2>(2) = self.position;
    Eigen::Index k = 4;
    for (std::size_t l = s.landmark_begin(); l < s.entities.size(); ++l, k += 2) {
      o.segment<2>(k) = s.entities[l].position - self.position;
    }
    for (int j = 0; j < n_movers; ++j) {
      if (j == i) continue;
      o.segment<2>(k) = s.entities[static_cast<std::size_t>(j)].position - self.position;
      k += 2;
    }
    obs.push_back(std::move(o));
  }
  return obs;
}

Vec2 prey_policy(const WorldState& s, std::size_t entity_index) {
  if (entity_index >= s.entities.size() || s.entities[entity_index].kind != EntityKind::Prey) {
    throw KindError("prey_policy: entity " + std::to_string(entity_index) + " is not prey");
  }
  const auto& prey = s.entities[entity_index];
  std::size_t nearest = s.entities.size();
  Real best = std::numeric_limits<Real>::infinity();
  for (std::size_t j = 0; j < s.prey_begin(); ++j) {
    const Real d = (s.entities[j].position - prey.position).norm();
    if (d < best) {
      best = d;
      nearest = j;
    }
  }
  if (nearest == s.entities.size() || best == Real(0)) return Vec2::Zero();
  return (prey.position - s.entities[nearest].position) / best;
}

Vector compute_rewards(const WorldState& s, const EnvConfig& config) {
  const auto n = static_cast<std::size_t>(s.n_learners);
  Vector rewards = Vector::Zero(static_cast<Eigen::Index>(n));
  if (config.scenario == Scenario::CoopNav) {
    Real shared = 0;
    for (std::size_t l = s.landmark_begin(); l < s.entities.size(); ++l) {
      Real closest = std::numeric_limits<Real>::infinity();
      for (std::size_t a = 0; a < n; ++a) {
        closest = std::min(closest, (s.entities[a].position - s.entities[l].position).norm());
      }
      shared -= closest;
    }
    // One penalty per overlapping pair, shared by everyone.
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (overlaps(s.entities[a], s.entities[b])) shared -= config.collision_penalty;
      }
    }
    rewards.setConstant(shared);
    return rewards;
  }
  for (std::size_t a = 0; a < n; ++a) {
    Real r = 0;
    Real nearest = std::numeric_limits<Real>::infinity();
    for (std::size_t p = s.prey_begin(); p < s.landmark_begin(); ++p) {
      if (overlaps(s.entities[a], s.entities[p])) r += config.tag_reward;
      nearest = std::min(nearest, (s.entities[a].position - s.entities[p].position).norm());
    }
    if (s.n_prey > 0) r -= config.distance_shaping * nearest;
    rewards(static_cast<Eigen::Index>(a)) = r;
  }
  return rewards;
}

StepResult step(WorldState& s, std::span<const Vec2> actions, const EnvConfig& config) {
  if (actions.size() != static_cast<std::size_t>(s.n_learners)) {
    throw ShapeError("step: expected " + std::to_string(s.n_learners) + " actions, got " +
                     std::to_string(actions.size()));
  }
  if (s.step_count >= config.max_episode_length) {
    throw std::logic_error("step: episode already finished; call reset");
  }
  std::vector<Vec2> forces(s.entities.size(), Vec2::Zero());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Vec2 clamped = actions[i].cwiseMax(Real(-1)).cwiseMin(Real(1));
    if (clamped != actions[i]) ++s.clamped_actions;
    forces[i] = clamped;
  }
  for (std::size_t p = s.prey_begin(); p < s.landmark_begin(); ++p) {
    forces[p] = prey_policy(s, p);
  }
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    auto& e = s.entities[i];
    if (!e.movable()) continue;
    e.velocity = (Real(1) - config.damping) * e.velocity + forces[i] * config.dt;
    const Real speed = e.velocity.norm();
    if (speed > config.max_speed) {
      e.velocity *= config.max_speed / speed;
      while (e.velocity.norm() > config.max_speed) {
        e.velocity *= Real(1) - std::numeric_limits<Real>::epsilon();
      }
    }
    e.position += e.velocity * config.dt;
  }
  s.step_count += 1;
  StepResult r;
  r.observations = observe(s);
  r.rewards = compute_rewards(s, config);
  r.done = s.step_count >= config.max_episode_length;
  return r;
}

}  // namespace marl::envs
