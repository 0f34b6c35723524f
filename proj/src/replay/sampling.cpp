#include "marl/replay/sampling.hpp"

#include <algorithm>
#include <string>

#include "marl/errors.hpp"

namespace marl::replay {

SampleIndexSet make_index_uniform(Rng& rng, std::size_t k, std::size_t len) {
  if (len == 0) throw EmptyBufferError("cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> dist(0, len - 1);
  SampleIndexSet out(k);
  for (auto& i : out) i = dist(rng);
  return out;
}

std::vector<std::size_t> neighbor_window(std::size_t i, std::size_t n, std::size_t d) {
  if (i >= d) {
    throw IndexError("neighbor_window: index " + std::to_string(i) + " outside [0, " +
                     std::to_string(d) + ")");
  }
  if (n < 1) throw ParameterError("neighbor_window: n must be >= 1");
  const std::size_t lo = i >= n ? i - n : 0;
  const std::size_t hi = std::min(d, i + n + 1);
  std::vector<std::size_t> out;
  out.reserve(hi - lo);
  for (std::size_t j = lo; j < hi; ++j) {
    if (j != i) out.push_back(j);
  }
  return out;
}

std::size_t anchor_count(std::size_t batch, std::size_t n) {
  if (n < 1) throw ParameterError("anchor_count: n must be >= 1");
  return (batch + 2 * n - 1) / (2 * n) + 8;
}

std::vector<std::size_t> neighbor_indices(std::span<const std::size_t> anchors, std::size_t len,
                                          std::size_t n, std::size_t b) {
  if (n < 1) throw ParameterError("neighbor sampling: n must be >= 1");
  if (len < 2 * n + 1) {
    throw InsufficientDataError("neighbor sampling needs at least 2n+1 = " +
                                std::to_string(2 * n + 1) + " records, buffer holds " +
                                std::to_string(len));
  }
  std::vector<std::size_t> out;
  out.reserve(b + 2 * n);
  for (const std::size_t i : anchors) {
    // Same window as neighbor_window, appended in place.
    if (i >= len) throw IndexError("anchor " + std::to_string(i) + " >= buffer length");
    const std::size_t lo = i >= n ? i - n : 0;
    const std::size_t hi = std::min(len, i + n + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j != i) out.push_back(j);
    }
    if (out.size() >= b) return out;
  }
  throw InsufficientDataError("neighbor sampling: anchors exhausted at " +
                              std::to_string(out.size()) + " of " + std::to_string(b) +
                              " records");
}

BatchArrays neighbor_batch(std::span<const std::size_t> anchors, const ReplayBuffer& buffer,
                           std::size_t n, std::size_t b) {
  auto idx = neighbor_indices(anchors, buffer.size(), n, b);
  idx.resize(b);
  return gather(buffer, idx);
}

std::vector<BatchArrays> collect_joint(std::span<const ReplayBuffer* const> buffers,
                                       std::span<const std::size_t> indices) {
  if (buffers.empty()) return {};
  const std::size_t len = buffers.front()->size();
  for (const auto* b : buffers) {
    if (b->size() != len || b->cursor() != buffers.front()->cursor()) {
      throw AlignmentError("collect_joint: agent buffers are not aligned");
    }
  }
  std::vector<BatchArrays> out(buffers.size());
  for (std::size_t a = 0; a < buffers.size(); ++a) gather(*buffers[a], indices, out[a]);
  return out;
}

SampleIndexSet UniformSampler::sample(Rng& rng, std::size_t len, std::size_t batch) const {
  return make_index_uniform(rng, batch, len);
}

SampleIndexSet NeighborSampler::sample(Rng& rng, std::size_t len, std::size_t batch) const {
  const auto anchors = make_index_uniform(rng, anchor_count(batch, neighbors), len);
  auto idx = neighbor_indices(anchors, len, neighbors, batch);
  idx.resize(batch);
  return idx;
}

std::size_t min_buffer_len(const Sampler& s, std::size_t batch) {
  if (const auto* nb = std::get_if<NeighborSampler>(&s)) {
    return std::max(batch, 2 * nb->neighbors + 1);
  }
  return std::max<std::size_t>(batch, 1);
}

}  // namespace marl::replay
