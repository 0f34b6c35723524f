#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "marl/replay/sampling.hpp"
#include "marl/types.hpp"

namespace marl::trainers {

enum class Algorithm { Maddpg, Masac };
enum class SamplerKind { Uniform, Neighbor };

std::string_view to_string(Algorithm a);
std::string_view to_string(SamplerKind s);
Algorithm parse_algorithm(std::string_view s);
SamplerKind parse_sampler(std::string_view s);

struct TrainerConfig {
  Real gamma = 0.95;
  Real tau = 0.01;
  Real lr = 0.01;
  std::size_t batch_size = 1024;
  std::size_t update_every = 100;
  std::size_t buffer_capacity = 100000;
  Real entropy_alpha = 0.05;
  Real exploration_sigma = 0.1;
  Algorithm algorithm = Algorithm::Maddpg;
  SamplerKind sampler = SamplerKind::Uniform;
  std::size_t neighbors = 3;
  int episodes = 2000;
  std::uint64_t seed = 0;
  Eigen::Index hidden = 64;
  // When false, time-limit terminations are stored as non-terminal and the
  // target bootstraps through them.
  bool mask_time_limit_dones = true;

  void validate() const;
  replay::Sampler make_sampler() const;
};

}  // namespace marl::trainers
