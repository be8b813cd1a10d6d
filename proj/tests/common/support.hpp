#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsde/fbm.hpp"
#include "mixsde/model.hpp"

namespace testing {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

/// Sample covariance of the columns of `rows` (one realization per row)
/// together with the standard error of every entry.
struct CovarianceEstimate {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd se;
};

inline CovarianceEstimate covariance_estimate(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  // Centred at the known mean zero, so each product is an unbiased sample.
  const auto m = static_cast<double>(x.rows());
  CovarianceEstimate out;
  out.cov = x.transpose() * y / m;
  const Eigen::MatrixXd second = x.cwiseProduct(x).transpose() * y.cwiseProduct(y) / m;
  out.se = ((second - out.cov.cwiseProduct(out.cov)) / (m - 1.0)).cwiseMax(0.0).cwiseSqrt();
  return out;
}

inline std::shared_ptr<const mixsde::CoefficientSet> coefficients(mixsde::CoefficientFn a,
                                                                  mixsde::CoefficientFn b,
                                                                  mixsde::CoefficientFn c,
                                                                  mixsde::CoefficientFn dc) {
  auto set = std::make_shared<mixsde::CoefficientSet>();
  set->name = "test";
  set->a = std::move(a);
  set->b = std::move(b);
  set->c = std::move(c);
  set->dc = std::move(dc);
  return set;
}

inline std::shared_ptr<const mixsde::CoefficientSet> zero_coefficients() {
  auto zero = [](double, double) { return 0.0; };
  return coefficients(zero, zero, zero, zero);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mixsde_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
