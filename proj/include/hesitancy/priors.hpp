#pragma once

#include <limits>
#include <string_view>

#include "hesitancy/dynamics.hpp"

namespace hesitancy {

inline constexpr double kPositiveLowerBound = 1e-15;

struct PriorTerm {
  enum class Family { normal, gamma };
  Family family = Family::normal;
  // normal: (mean, sd); gamma: (shape, rate).
  double a = 0.0;
  double b = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static PriorTerm normal(double mean, double sd, double lower = -std::numeric_limits<double>::infinity(),
                          double upper = std::numeric_limits<double>::infinity()) {
    return {Family::normal, mean, sd, lower, upper};
  }
  static PriorTerm gamma(double shape, double rate) {
    return {Family::gamma, shape, rate, kPositiveLowerBound, std::numeric_limits<double>::infinity()};
  }

  bool in_support(double x) const { return x >= lower && x <= upper; }
  // Untruncated log density; -inf outside [lower, upper].
  double log_density(double x) const;
  // Derivative of log_density inside the support.
  double d_log_density(double x) const;
  void validate(std::string_view name) const;
};

struct PriorSpec {
  PriorTerm beta = PriorTerm::normal(0.2, 0.3, kPositiveLowerBound);
  PriorTerm rho = PriorTerm::normal(0.1, 0.3, kPositiveLowerBound);
  PriorTerm nu = PriorTerm::normal(0.0025, 0.1, kPositiveLowerBound);
  PriorTerm gamma_e = PriorTerm::normal(0.0, 1.0);
  PriorTerm gamma_p = PriorTerm::normal(0.0, 0.5);
  PriorTerm gamma_a = PriorTerm::normal(0.0, 0.5);
  PriorTerm alpha0 = PriorTerm::normal(0.2, 0.5, kPositiveLowerBound, 1.0);
  PriorTerm phi = PriorTerm::gamma(1.0, 6.0);

  void validate() const;
};

// Sum of the log prior densities of the parameters present in `variant`.
double log_prior(const ModelParams& params, const PriorSpec& priors, ModelVariant variant);

}  // namespace hesitancy
