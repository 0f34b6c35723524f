#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "marl/types.hpp"

namespace marl::replay {

struct Transition {
  Vector obs;
  Vector action;
  Real reward = 0;
  Vector next_obs;
  bool done = false;
};

// Fixed-capacity ring buffer stored as five parallel flat arrays, so a run of
// consecutive slots is one contiguous block per field. Field widths are fixed
// by the first insert.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(const Transition& t);

  std::size_t size() const { return len_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  std::uint64_t total_inserts() const { return total_; }
  Eigen::Index obs_dim() const { return obs_dim_; }
  Eigen::Index act_dim() const { return act_dim_; }

  Transition at(std::size_t slot) const;

  const Real* obs_ptr(std::size_t slot) const { return obs_.data() + slot * obs_dim_; }
  const Real* next_obs_ptr(std::size_t slot) const { return next_obs_.data() + slot * obs_dim_; }
  const Real* action_ptr(std::size_t slot) const { return actions_.data() + slot * act_dim_; }
  const Real* reward_ptr(std::size_t slot) const { return rewards_.data() + slot; }
  const std::uint8_t* done_ptr(std::size_t slot) const { return dones_.data() + slot; }

  // Versioned binary snapshot: "RPLB" | u32 version | u32 scalar bytes |
  // u64 capacity, len, cursor, total, obs_dim, act_dim | field arrays.
  void save(const std::filesystem::path& path) const;
  static ReplayBuffer load(const std::filesystem::path& path);

 private:
  void allocate(Eigen::Index obs_dim, Eigen::Index act_dim);

  std::size_t capacity_;
  std::size_t len_ = 0;
  std::size_t cursor_ = 0;
  std::uint64_t total_ = 0;
  Eigen::Index obs_dim_ = 0;
  Eigen::Index act_dim_ = 0;
  std::vector<Real> obs_;
  std::vector<Real> actions_;
  std::vector<Real> rewards_;
  std::vector<Real> next_obs_;
  std::vector<std::uint8_t> dones_;
};

// Unpacked mini-batch, one record per column.
struct BatchArrays {
  Matrix obses_t;
  Matrix actions;
  Vector rewards;
  Matrix obses_tp1;
  Vector dones;  // 0 or 1

  Eigen::Index size() const { return rewards.size(); }
};

// Copies the records at `indices` into `out`, resizing it as needed. Runs of
// consecutive indices are copied as single blocks.
void gather(const ReplayBuffer& buffer, std::span<const std::size_t> indices, BatchArrays& out);
BatchArrays gather(const ReplayBuffer& buffer, std::span<const std::size_t> indices);

}  // namespace marl::replay
