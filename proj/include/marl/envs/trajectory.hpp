#pragma once

#include <filesystem>
#include <fstream>

#include "marl/envs/particle_world.hpp"

namespace marl::envs {

// CSV rows: step,entity_id,kind,x,y,vx,vy,reward
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);

  // Non-learner entities are written with reward 0.
  void write(const WorldState& state, const Vector& rewards);

 private:
  std::ofstream out_;
};

}  // namespace marl::envs
