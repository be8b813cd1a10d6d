#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixsde {

/// Argument outside the admissible range of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Floating-point breakdown while computing a path or a functional.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::size_t step = 0)
      : std::runtime_error(what), step_(step) {}

  /// Index of the first offending step (0 when not step-related).
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A covariance matrix that should be positive semidefinite is not.
class NotPositiveDefiniteError : public std::runtime_error {
 public:
  NotPositiveDefiniteError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// A request that exceeds configured memory or step limits.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must share a noise realization do not.
class CouplingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mixsde
