#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

namespace mixsde {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: the output block is a bijective function of the 128-bit
/// counter under a fixed 64-bit key, so distinct counters never collide.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t key) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}
  explicit Philox4x32(Key key) noexcept : key_(key) {}

  Block operator()(Block counter) const noexcept;

 private:
  Key key_;
};

/// Standard normal variates addressed by (seed, stream, index).
///
/// The seed is the Philox key; the stream id occupies the upper half of the
/// counter and the block index the lower half, so two streams under the
/// same seed never share a counter.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : philox_(seed), stream_(stream) {}

  double operator()(std::uint64_t index) const noexcept;

  /// out[i] = (*this)(offset + i)
  void fill(Eigen::Ref<Eigen::VectorXd> out, std::uint64_t offset = 0) const noexcept;

  /// Uniform on (0, 1), drawn from the same counter space (stream-disjoint
  /// from the normals only if callers use a separate stream id).
  double uniform(std::uint64_t index) const noexcept;

  std::uint64_t stream() const noexcept { return stream_; }

 private:
  Philox4x32::Block block(std::uint64_t index) const noexcept;

  Philox4x32 philox_;
  std::uint64_t stream_;
};

/// Stream ids used by the noise generators.  Path p of an experiment draws
/// its Wiener normals from stream 2p and its fBm normals from 2p + 1.
constexpr std::uint64_t wiener_stream(std::uint64_t path) noexcept { return 2 * path; }
constexpr std::uint64_t fbm_stream(std::uint64_t path) noexcept { return 2 * path + 1; }

}  // namespace mixsde
