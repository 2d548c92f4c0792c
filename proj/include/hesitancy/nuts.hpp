#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hesitancy/rng.hpp"

namespace hesitancy {

// Log density and its gradient; returns -inf (gradient ignored) outside the support.
using LogDensityFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct NutsOptions {
  int warmup = 1000;
  int draws = 1000;
  double target_accept = 0.8;
  int max_depth = 10;
  bool dense_metric = false;
  double max_delta_h = 1000.0;
  // Starting inverse metric (empty: identity). Only the diagonal is used
  // for a diagonal metric.
  Eigen::MatrixXd initial_inv_metric;
  // Re-estimate the metric in warmup windows; otherwise only the step size adapts.
  bool adapt_metric = true;
};

struct NutsChain {
  Eigen::MatrixXd draws;  // draws x dim, on the scale the density is defined on
  std::vector<double> accept_stat;
  std::vector<int> tree_depth;
  std::vector<int> n_leapfrog;
  std::vector<bool> divergent;
  int warmup_divergences = 0;
  double step_size = 0.0;
  Eigen::MatrixXd inv_metric;  // dim x dim (diagonal stored as a full matrix)
};

// Multinomial no-U-turn sampler with dual-averaging step size and windowed
// metric adaptation during warmup.
NutsChain run_nuts(const LogDensityFn& log_density, const Eigen::VectorXd& init,
                   const NutsOptions& options, Rng& rng);

}  // namespace hesitancy
