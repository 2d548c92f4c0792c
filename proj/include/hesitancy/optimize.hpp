#pragma once

#include <Eigen/Dense>

#include "hesitancy/nuts.hpp"

namespace hesitancy {

struct ModeResult {
  Eigen::VectorXd point;
  double log_density = 0.0;
  // Negative Hessian of the log density at `point`, symmetrized.
  Eigen::MatrixXd precision;
  int iterations = 0;
  bool converged = false;
};

struct ModeOptions {
  int max_iterations = 100;
  // Stop once a Newton step gains less than this much log density.
  double tolerance = 1e-8;
  // Largest Euclidean step length in a single iteration.
  double max_step = 2.0;
};

// Damped Newton ascent on the absolute-eigenvalue Hessian, so saddle regions
// still give ascent directions. The Hessian is a central difference of the
// gradient.
ModeResult find_mode(const LogDensityFn& log_density, const Eigen::VectorXd& start, const ModeOptions& options = {});

// Central-difference Hessian of the log density from its gradient.
Eigen::MatrixXd numerical_hessian(const LogDensityFn& log_density, const Eigen::VectorXd& at);

// Covariance from a precision matrix with eigenvalues floored at `floor`.
Eigen::MatrixXd regularized_covariance(const Eigen::MatrixXd& precision, double floor = 1e-8);

}  // namespace hesitancy
