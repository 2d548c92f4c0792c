#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hesitancy/data_io.hpp"
#include "hesitancy/diagnostics.hpp"
#include "hesitancy/dynamics.hpp"
#include "hesitancy/exposure.hpp"
#include "hesitancy/sampler.hpp"

namespace hesitancy {

enum class EffectMethod { estimand, counterfactual };
std::string_view to_string(EffectMethod method);

struct EffectReport {
  EffectMethod method = EffectMethod::estimand;
  // Vaccinations per capita per day per unit exposure; estimand method only.
  std::optional<double> ate;
  std::optional<Interval> ate_ci;
  // Prevented vaccinations (positive when exposure lowers uptake).
  double delta_v = 0.0;
  Interval delta_v_ci;
  double tail_p = 1.0;
  std::size_t draws_used = 0;
  std::size_t draws_excluded = 0;
  double total_population = 0.0;
  double period_days = 0.0;
  // Per-draw values, in draw order.
  std::vector<double> ate_draws;
  std::vector<double> delta_v_draws;
};

// Population-weighted mean, over regions and observed transitions t, of
// nu * S_{t-1} * gamma_e * (1 - alpha_{t-1}) / N_i, negated. alpha is rebuilt
// per draw from the observed exposure; nu is the value for interval t-1.
// tail_p is the posterior probability that the ATE is >= 0.
EffectReport estimate_ate(const PosteriorSamples& samples, const AlignedDataset& dataset,
                          const ExposureSeries& exposure, const ModelSpec& spec);

// Estimand ATE plus delta_v = N * period_days * weighted mean of
// E_{t-1,i} * nu * S_{t-1} * gamma_e * (1 - alpha_{t-1}) / N_i, where E_{t-1,i}
// is the exposure of the interval ending at grid point t. A period of 0 uses
// the observed span of the dataset.
EffectReport prevented_vaccinations(const PosteriorSamples& samples, const AlignedDataset& dataset,
                                    const ExposureSeries& exposure, const ModelSpec& spec,
                                    double total_population, double period_days = 0.0);

// Per draw, simulates every region from its first observed state twice, with
// the observed exposure and with zero exposure; delta_v is the summed
// difference in final V, scaled by total_population / sum N_i. Draws whose
// simulation is not finite are excluded and counted. tail_p is P(delta_v <= 0).
EffectReport counterfactual_delta_v(const PosteriorSamples& samples, const AlignedDataset& dataset,
                                    const ExposureSeries& exposure, const ModelSpec& spec,
                                    double total_population);

struct ShuffleNullResult {
  // Posterior probability of gamma_e <= 0 on the shuffled fit.
  double tail_p = 1.0;
  Interval gamma_e_hdi;
  // Null confirmed: the 95% HDI covers 0.
  bool passes = false;
};

ShuffleNullResult shuffle_null_test(const PosteriorSamples& samples_fit_on_shuffled);

}  // namespace hesitancy
