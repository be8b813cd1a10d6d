#include "mixsde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixsde/errors.hpp"

namespace mixsde {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("TimeGrid: horizon must be positive and finite");
  }
  if (steps == 0) throw DomainError("TimeGrid: need at least one step");
}

Eigen::VectorXd TimeGrid::nodes() const {
  Eigen::VectorXd t(size());
  for (std::size_t k = 0; k <= steps_; ++k) t[static_cast<Eigen::Index>(k)] = node(k);
  return t;
}

std::size_t TimeGrid::floor_index(double u) const noexcept {
  if (!(u > 0.0)) return 0;
  if (u >= horizon_) return steps_;
  auto k = static_cast<std::size_t>(std::floor(u / horizon_ * static_cast<double>(steps_)));
  if (k > steps_) k = steps_;
  // Division can round across a node boundary; settle on the exact node test.
  while (k > 0 && node(k) > u) --k;
  while (k < steps_ && node(k + 1) <= u) ++k;
  return k;
}

std::size_t TimeGrid::find_node(double u) const noexcept {
  const double tol = 1e-12 * horizon_;
  if (u < -tol || u > horizon_ + tol) return npos;
  const double scaled = u / horizon_ * static_cast<double>(steps_);
  const auto k = static_cast<std::size_t>(std::llround(std::max(scaled, 0.0)));
  if (k > steps_) return npos;
  return std::abs(node(k) - u) <= tol ? k : npos;
}

bool TimeGrid::refines(const TimeGrid& coarse) const noexcept {
  return horizon_ == coarse.horizon_ && steps_ % coarse.steps_ == 0;
}

std::size_t TimeGrid::ratio(const TimeGrid& coarse) const {
  if (!refines(coarse)) {
    throw DomainError("TimeGrid: grid with " + std::to_string(steps_) +
                      " steps does not refine grid with " + std::to_string(coarse.steps_));
  }
  return steps_ / coarse.steps_;
}

TimeGrid refine_dyadic(const TimeGrid& grid, unsigned m, std::size_t max_steps) {
  if (m == 0) throw DomainError("refine_dyadic: m must be at least 1");
  if (m >= 63 || grid.steps() > (max_steps >> m)) {
    throw ResourceError("refine_dyadic: n 2^m exceeds the configured maximum of " +
                        std::to_string(max_steps) + " steps");
  }
  return TimeGrid(grid.horizon(), grid.steps() << m);
}

}  // namespace mixsde
