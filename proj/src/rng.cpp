#include "mixsde/rng.hpp"

#include <cmath>
#include <numbers>

namespace mixsde {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53 random bits mapped to the open interval (0, 1).
inline double to_open_unit(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Block Philox4x32::operator()(Block c) const noexcept {
  Key k = key_;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

Philox4x32::Block NormalStream::block(std::uint64_t index) const noexcept {
  return philox_({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)});
}

double NormalStream::operator()(std::uint64_t index) const noexcept {
  const auto b = block(index / 2);
  const double u1 = to_open_unit(b[0], b[1]);
  const double u2 = to_open_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? r * std::cos(phase) : r * std::sin(phase);
}

void NormalStream::fill(Eigen::Ref<Eigen::VectorXd> out, std::uint64_t offset) const noexcept {
  const auto n = static_cast<std::uint64_t>(out.size());
  std::uint64_t i = 0;
  // Leading odd index: take the sine half of its pair.
  if (n > 0 && offset % 2 == 1) {
    out[0] = (*this)(offset);
    i = 1;
  }
  for (; i + 1 < n; i += 2) {
    const auto b = block((offset + i) / 2);
    const double r = std::sqrt(-2.0 * std::log(to_open_unit(b[0], b[1])));
    const double phase = 2.0 * std::numbers::pi * to_open_unit(b[2], b[3]);
    out[static_cast<Eigen::Index>(i)] = r * std::cos(phase);
    out[static_cast<Eigen::Index>(i + 1)] = r * std::sin(phase);
  }
  if (i < n) out[static_cast<Eigen::Index>(i)] = (*this)(offset + i);
}

double NormalStream::uniform(std::uint64_t index) const noexcept {
  const auto b = block(index / 2);
  return index % 2 == 0 ? to_open_unit(b[0], b[1]) : to_open_unit(b[2], b[3]);
}

}  // namespace mixsde
