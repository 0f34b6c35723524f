#include "marl/envs/trajectory.hpp"

#include <stdexcept>

namespace marl::envs {

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw std::runtime_error("cannot open trajectory file " + path.string());
  out_.precision(17);
  out_ << "step,entity_id,kind,x,y,vx,vy,reward\n";
}

void TrajectoryWriter::write(const WorldState& state, const Vector& rewards) {
  for (std::size_t i = 0; i < state.entities.size(); ++i) {
    const auto& e = state.entities[i];
    const Real r = i < state.prey_begin() && static_cast<Eigen::Index>(i) < rewards.size()
                       ? rewards(static_cast<Eigen::Index>(i))
                       : Real(0);
    out_ << state.step_count << ',' << i << ',' << to_string(e.kind) << ',' << e.position.x()
         << ',' << e.position.y() << ',' << e.velocity.x() << ',' << e.velocity.y() << ',' << r
         << '\n';
  }
}

}  // namespace marl::envs
