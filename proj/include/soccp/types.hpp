#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace soccp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Default relative tolerance for membership tests.
inline constexpr double kDefaultTol = 1e-8;
// Default relative tolerance for cone-region dispatch.
inline constexpr double kClassifyTol = 1e-9;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotDifferentiableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NotInOmegaError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoFeasibleFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relative slack: tol scaled by max(1, magnitude).
inline double rel_scale(double tol, double magnitude) {
  return tol * std::max(1.0, magnitude);
}

}  // namespace soccp
