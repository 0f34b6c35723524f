#include "marl/replay/replay_buffer.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "marl/errors.hpp"

namespace marl::replay {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ParameterError("replay buffer capacity must be > 0");
}

void ReplayBuffer::allocate(Eigen::Index obs_dim, Eigen::Index act_dim) {
  obs_dim_ = obs_dim;
  act_dim_ = act_dim;
  obs_.resize(capacity_ * static_cast<std::size_t>(obs_dim));
  next_obs_.resize(capacity_ * static_cast<std::size_t>(obs_dim));
  actions_.resize(capacity_ * static_cast<std::size_t>(act_dim));
  rewards_.resize(capacity_);
  dones_.resize(capacity_);
}

void ReplayBuffer::add(const Transition& t) {
  if (t.obs.size() != t.next_obs.size()) {
    throw ShapeError("transition obs and next_obs lengths differ");
  }
  if (!std::isfinite(t.reward)) throw NonFiniteError("transition reward is not finite");
  if (total_ == 0) {
    if (t.obs.size() == 0 || t.action.size() == 0) throw ShapeError("empty transition fields");
    allocate(t.obs.size(), t.action.size());
  } else if (t.obs.size() != obs_dim_ || t.action.size() != act_dim_) {
    throw ShapeError("transition shape differs from the buffer's first insert");
  }
  const std::size_t slot = cursor_;
  std::memcpy(obs_.data() + slot * obs_dim_, t.obs.data(), sizeof(Real) * obs_dim_);
  std::memcpy(next_obs_.data() + slot * obs_dim_, t.next_obs.data(), sizeof(Real) * obs_dim_);
  std::memcpy(actions_.data() + slot * act_dim_, t.action.data(), sizeof(Real) * act_dim_);
  rewards_[slot] = t.reward;
  dones_[slot] = t.done ? 1 : 0;
  cursor_ = (cursor_ + 1) % capacity_;
  ++total_;
  if (len_ < capacity_) ++len_;
}

Transition ReplayBuffer::at(std::size_t slot) const {
  if (slot >= len_) throw IndexError("replay slot " + std::to_string(slot) + " out of range");
  Transition t;
  t.obs = Eigen::Map<const Vector>(obs_ptr(slot), obs_dim_);
  t.next_obs = Eigen::Map<const Vector>(next_obs_ptr(slot), obs_dim_);
  t.action = Eigen::Map<const Vector>(action_ptr(slot), act_dim_);
  t.reward = rewards_[slot];
  t.done = dones_[slot] != 0;
  return t;
}

namespace {

constexpr char kMagic[4] = {'R', 'P', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& f, const T* data, std::size_t count) {
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(sizeof(T) * count));
}

template <typename T>
void read_raw(std::ifstream& f, T* data, std::size_t count) {
  f.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(sizeof(T) * count));
  if (!f) throw ShapeError("replay snapshot truncated");
}

}  // namespace

void ReplayBuffer::save(const std::filesystem::path& path) const {
  static_assert(std::endian::native == std::endian::little, "snapshots are little-endian");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f.write(kMagic, 4);
  const std::uint32_t head[2] = {kVersion, static_cast<std::uint32_t>(sizeof(Real))};
  write_raw(f, head, 2);
  const std::uint64_t dims[6] = {capacity_, len_, cursor_, total_,
                                 static_cast<std::uint64_t>(obs_dim_),
                                 static_cast<std::uint64_t>(act_dim_)};
  write_raw(f, dims, 6);
  write_raw(f, obs_.data(), len_ * obs_dim_);
  write_raw(f, actions_.data(), len_ * act_dim_);
  write_raw(f, rewards_.data(), len_);
  write_raw(f, next_obs_.data(), len_ * obs_dim_);
  write_raw(f, dones_.data(), len_);
}

ReplayBuffer ReplayBuffer::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  read_raw(f, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ShapeError("replay snapshot: bad magic");
  std::uint32_t head[2];
  read_raw(f, head, 2);
  if (head[0] != kVersion) throw ShapeError("replay snapshot: unsupported version");
  if (head[1] != sizeof(Real)) throw ShapeError("replay snapshot: scalar width mismatch");
  std::uint64_t dims[6];
  read_raw(f, dims, 6);
  ReplayBuffer b(dims[0]);
  b.len_ = dims[1];
  b.cursor_ = dims[2];
  b.total_ = dims[3];
  if (b.len_ > b.capacity_ || b.cursor_ >= b.capacity_) throw ShapeError("replay snapshot: bad header");
  if (b.total_ > 0) {
    b.allocate(static_cast<Eigen::Index>(dims[4]), static_cast<Eigen::Index>(dims[5]));
    read_raw(f, b.obs_.data(), b.len_ * b.obs_dim_);
    read_raw(f, b.actions_.data(), b.len_ * b.act_dim_);
    read_raw(f, b.rewards_.data(), b.len_);
    read_raw(f, b.next_obs_.data(), b.len_ * b.obs_dim_);
    read_raw(f, b.dones_.data(), b.len_);
  }
  return b;
}

void gather(const ReplayBuffer& buffer, std::span<const std::size_t> indices, BatchArrays& out) {
  const auto b = static_cast<Eigen::Index>(indices.size());
  const Eigen::Index od = buffer.obs_dim();
  const Eigen::Index ad = buffer.act_dim();
  out.obses_t.resize(od, b);
  out.obses_tp1.resize(od, b);
  out.actions.resize(ad, b);
  out.rewards.resize(b);
  out.dones.resize(b);
  const std::size_t len = buffer.size();
  std::size_t k = 0;
  while (k < indices.size()) {
    const std::size_t first = indices[k];
    if (first >= len) throw IndexError("gather index " + std::to_string(first) + " >= len");
    std::size_t run = 1;
    while (k + run < indices.size() && indices[k + run] == first + run && first + run < len) ++run;
    const auto col = static_cast<Eigen::Index>(k);
    std::memcpy(out.obses_t.data() + col * od, buffer.obs_ptr(first), sizeof(Real) * od * run);
    std::memcpy(out.obses_tp1.data() + col * od, buffer.next_obs_ptr(first), sizeof(Real) * od * run);
    std::memcpy(out.actions.data() + col * ad, buffer.action_ptr(first), sizeof(Real) * ad * run);
    std::memcpy(out.rewards.data() + col, buffer.reward_ptr(first), sizeof(Real) * run);
    const std::uint8_t* done = buffer.done_ptr(first);
    for (std::size_t r = 0; r < run; ++r) out.dones(col + static_cast<Eigen::Index>(r)) = done[r];
    k += run;
  }
}

BatchArrays gather(const ReplayBuffer& buffer, std::span<const std::size_t> indices) {
  BatchArrays out;
  gather(buffer, indices, out);
  return out;
}

}  // namespace marl::replay
