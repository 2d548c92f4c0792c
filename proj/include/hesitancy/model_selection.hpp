#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hesitancy/data_io.hpp"
#include "hesitancy/dynamics.hpp"
#include "hesitancy/exposure.hpp"
#include "hesitancy/sampler.hpp"

namespace hesitancy {

struct PointId {
  std::string region_id;
  std::size_t interval = 0;  // grid index t of the transition (t-1, t)
  Channel channel = kCases;

  bool operator==(const PointId&) const = default;
};

struct PointwiseLogLik {
  Eigen::MatrixXd values;  // draws x points
  std::vector<PointId> points;  // may be empty for non-epidemic fixtures
};

// Entry (s, p) is the negative binomial log pmf of point p under draw s.
// Throws NumericalError naming the point when an entry is not finite.
PointwiseLogLik pointwise_loglik(const PosteriorSamples& samples, const AlignedDataset& dataset,
                                 const ExposureSeries& exposure, const ModelSpec& spec);

inline constexpr double kParetoKThreshold = 0.7;

struct ElpdReport {
  double elpd_loo = 0.0;
  double se = 0.0;
  std::vector<double> pointwise;  // elpd_p
  std::vector<double> pareto_k;   // +inf where the tail fit failed
  std::size_t n_bad_k = 0;        // k > 0.7, including failed fits
  std::vector<PointId> points;
  std::vector<std::string> warnings;
};

struct GeneralizedPareto {
  double k = 0.0;
  double sigma = 0.0;
};

// Zhang-Stephens profile-likelihood fit with the weakly informative shape
// prior used by PSIS. `x` must be sorted ascending and non-negative.
GeneralizedPareto fit_generalized_pareto(const std::vector<double>& x);

// Pareto-smoothed importance weights (log, normalized) for one point, from
// the raw log ratios. Returns the shape k, +inf when the fit failed.
double pareto_smooth(std::vector<double>& log_weights);

ElpdReport psis_loo(const PointwiseLogLik& loglik);

struct RankEntry {
  std::string name;
  double elpd_loo = 0.0;
  double se = 0.0;
  double elpd_diff = 0.0;  // relative to the best model, <= 0
  double se_diff = 0.0;
};

struct PairwiseDiff {
  std::string better;
  std::string worse;
  double elpd_diff = 0.0;  // better minus worse, >= 0
  double se_diff = 0.0;
};

struct ModelComparison {
  std::vector<RankEntry> ranking;  // by elpd_loo, descending
  std::vector<PairwiseDiff> pairs;
};

struct NamedElpd {
  std::string name;
  ElpdReport report;
};

// Reports must cover the same points; throws InvalidInput otherwise.
ModelComparison compare_models(const std::vector<NamedElpd>& reports);

}  // namespace hesitancy
