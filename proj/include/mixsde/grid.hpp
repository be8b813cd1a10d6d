#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace mixsde {

/// Uniform partition {k T / n : 0 <= k <= n} of [0, T].
///
/// Nodes are always computed as (k * T) / n from the integer index, so a
/// dyadic refinement reproduces the coarse nodes bit-for-bit.
class TimeGrid {
 public:
  static constexpr std::size_t kDefaultMaxSteps = std::size_t{1} << 24;

  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double step() const noexcept { return horizon_ / static_cast<double>(steps_); }

  double node(std::size_t k) const noexcept {
    return (static_cast<double>(k) * horizon_) / static_cast<double>(steps_);
  }

  Eigen::VectorXd nodes() const;

  /// Largest k with node(k) <= u (u is clamped into [0, T]).
  std::size_t floor_index(double u) const noexcept;

  /// Index k with node(k) == u up to 1e-12 T, or npos.
  std::size_t find_node(double u) const noexcept;

  /// True if every node of `coarse` is a node of this grid.
  bool refines(const TimeGrid& coarse) const noexcept;

  /// Number of fine cells per coarse cell; requires refines(coarse).
  std::size_t ratio(const TimeGrid& coarse) const;

  bool operator==(const TimeGrid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  double horizon_;
  std::size_t steps_;
};

/// Grid with n 2^m steps whose every 2^m-th node is a node of `grid`.
TimeGrid refine_dyadic(const TimeGrid& grid, unsigned m,
                       std::size_t max_steps = TimeGrid::kDefaultMaxSteps);

}  // namespace mixsde
