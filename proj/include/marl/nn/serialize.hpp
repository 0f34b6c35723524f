#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "marl/nn/mlp.hpp"

namespace marl::nn {

// Flat little-endian snapshot of an MlpParams:
//   "MLPB" | u32 version | u32 scalar bytes | u32 reserved
//   u64 input | u64 hidden | u64 output
//   w1, b1, w2, b2, w3, b3 (matrices row-major)
inline constexpr char kMlpMagic[4] = {'M', 'L', 'P', 'B'};
inline constexpr std::uint32_t kMlpBlobVersion = 1;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ShapeError("mlp blob truncated");
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

template <typename Scalar>
std::vector<std::uint8_t> to_bytes(const MlpParams<Scalar>& p) {
  std::vector<std::uint8_t> out(std::begin(kMlpMagic), std::end(kMlpMagic));
  detail::put_le<std::uint32_t>(out, kMlpBlobVersion);
  detail::put_le<std::uint32_t>(out, sizeof(Scalar));
  detail::put_le<std::uint32_t>(out, 0);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.input_dim()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.hidden_dim()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.output_dim()));
  for_each_tensor(
      [&out](const auto& t) {
        for (Eigen::Index r = 0; r < t.rows(); ++r)
          for (Eigen::Index c = 0; c < t.cols(); ++c) detail::put_le<Scalar>(out, t(r, c));
      },
      p);
  return out;
}

template <typename Scalar>
MlpParams<Scalar> from_bytes(std::span<const std::uint8_t> in) {
  if (in.size() < 4 || std::memcmp(in.data(), kMlpMagic, 4) != 0) {
    throw ShapeError("mlp blob: bad magic");
  }
  std::size_t pos = 4;
  if (detail::get_le<std::uint32_t>(in, pos) != kMlpBlobVersion) {
    throw ShapeError("mlp blob: unsupported version");
  }
  if (detail::get_le<std::uint32_t>(in, pos) != sizeof(Scalar)) {
    throw ShapeError("mlp blob: scalar width mismatch");
  }
  (void)detail::get_le<std::uint32_t>(in, pos);
  const auto input = detail::get_le<std::uint64_t>(in, pos);
  const auto hidden = detail::get_le<std::uint64_t>(in, pos);
  const auto output = detail::get_le<std::uint64_t>(in, pos);
  auto p = MlpParams<Scalar>::zeros(static_cast<Eigen::Index>(input),
                                    static_cast<Eigen::Index>(output),
                                    static_cast<Eigen::Index>(hidden));
  for_each_tensor(
      [&](auto& t) {
        for (Eigen::Index r = 0; r < t.rows(); ++r)
          for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = detail::get_le<Scalar>(in, pos);
      },
      p);
  if (pos != in.size()) throw ShapeError("mlp blob: trailing bytes");
  return p;
}

template <typename Scalar>
void save_mlp(const std::filesystem::path& path, const MlpParams<Scalar>& p) {
  const auto bytes = to_bytes(p);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

template <typename Scalar>
MlpParams<Scalar> load_mlp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return from_bytes<Scalar>(bytes);
}

}  // namespace marl::nn
