#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "marl/replay/replay_buffer.hpp"

namespace marl::replay {

using SampleIndexSet = std::vector<std::size_t>;

// K indices drawn i.i.d. uniform over [0, len), with replacement.
SampleIndexSet make_index_uniform(Rng& rng, std::size_t k, std::size_t len);

// {j : max(0, i-n) <= j < min(d, i+n+1), j != i}, ascending.
std::vector<std::size_t> neighbor_window(std::size_t i, std::size_t n, std::size_t d);

// Anchors drawn per neighbor batch: ceil(b / 2n) + 8.
std::size_t anchor_count(std::size_t batch, std::size_t n);

// Index sequence of the neighbor sampling strategy before truncation: whole
// windows are appended anchor by anchor until at least b indices are held.
// Throws InsufficientDataError when len < 2n+1 or the anchors run out first.
std::vector<std::size_t> neighbor_indices(std::span<const std::size_t> anchors, std::size_t len,
                                          std::size_t n, std::size_t b);

// neighbor_indices truncated to exactly b records and gathered from buffer.
BatchArrays neighbor_batch(std::span<const std::size_t> anchors, const ReplayBuffer& buffer,
                           std::size_t n, std::size_t b);

// Applies one index set to every agent's buffer so the k-th record of each
// returned batch comes from the same environment step.
std::vector<BatchArrays> collect_joint(std::span<const ReplayBuffer* const> buffers,
                                       std::span<const std::size_t> indices);

struct UniformSampler {
  SampleIndexSet sample(Rng& rng, std::size_t len, std::size_t batch) const;
};

struct NeighborSampler {
  std::size_t neighbors = 3;
  SampleIndexSet sample(Rng& rng, std::size_t len, std::size_t batch) const;
};

template <typename S>
concept IndexSampler = requires(const S& s, Rng& rng, std::size_t n) {
  { s.sample(rng, n, n) } -> std::same_as<SampleIndexSet>;
};

static_assert(IndexSampler<UniformSampler>);
static_assert(IndexSampler<NeighborSampler>);

using Sampler = std::variant<UniformSampler, NeighborSampler>;

inline SampleIndexSet sample_indices(const Sampler& s, Rng& rng, std::size_t len,
                                     std::size_t batch) {
  return std::visit([&](const auto& impl) { return impl.sample(rng, len, batch); }, s);
}

// Minimum buffer length at which a sampler can serve `batch` records.
std::size_t min_buffer_len(const Sampler& s, std::size_t batch);

}  // namespace marl::replay
