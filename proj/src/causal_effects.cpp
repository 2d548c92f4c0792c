#include "hesitancy/causal_effects.hpp"

#include <cmath>
#include <numeric>

#include "hesitancy/error.hpp"
#include "hesitancy/posterior.hpp"

namespace hesitancy {

namespace {

ModelSpec spec_for(const PosteriorSamples& samples, ModelSpec spec) {
  spec.variant = samples.layout().variant;
  if (!has_dynamic_alpha(spec.variant))
    throw InvalidInput("effect estimates need a variant with exposure-driven hesitancy (gamma_e)");
  return spec;
}

std::vector<double> exposure_row(const ExposureSeries& exposure, std::size_t i) {
  const auto row = exposure.values.row(static_cast<Eigen::Index>(i));
  return std::vector<double>(row.begin(), row.end());
}

double total_population_of(const AlignedDataset& ds) {
  double n = 0.0;
  for (const auto& r : ds.regions) n += r.population;
  return n;
}

void check_inputs(const PosteriorSamples& samples, const AlignedDataset& ds, const ExposureSeries& exposure) {
  if (samples.num_draws() == 0) throw InvalidInput("posterior has no draws");
  if (ds.regions.empty()) throw InvalidInput("dataset has no regions");
  check_aligned(ds, exposure);
  if (samples.layout().region_ids != ds.region_ids())
    throw InvalidInput("posterior regions do not match the dataset regions");
  if (ds.first_observed >= ds.num_intervals()) throw InvalidInput("dataset has no observed transitions");
}

// Per draw: population-weighted means of the inner term and of the
// exposure-weighted inner term.
struct InnerMeans {
  double inner = 0.0;
  double exposed = 0.0;
};

InnerMeans inner_means(const ModelParams& p, const AlignedDataset& ds, const ExposureSeries& exposure,
                       const ModelSpec& spec) {
  const std::size_t k_total = ds.num_intervals();
  const double n_t = static_cast<double>(k_total - ds.first_observed);
  double inner_sum = 0.0, exposed_sum = 0.0;
  for (std::size_t i = 0; i < ds.regions.size(); ++i) {
    const auto& r = ds.regions[i];
    const auto e = exposure_row(exposure, i);
    const auto alpha = reconstruct_alpha(p, spec, i, e, k_total);
    double inner_i = 0.0, exposed_i = 0.0;
    for (std::size_t t = ds.first_observed + 1; t <= k_total; ++t) {
      const double nu = rates_at(p, spec, t - 1).nu;
      // The 1/N_i factor cancels against the N_i weight.
      const double term = nu * r.susceptible[t - 1] * p.gamma_e * (1.0 - alpha[t - 1]);
      inner_i += term;
      exposed_i += e[t - 1] * term;
    }
    inner_sum += inner_i / n_t;
    exposed_sum += exposed_i / n_t;
  }
  const double n_pop = total_population_of(ds);
  return {inner_sum / n_pop, exposed_sum / n_pop};
}

EffectReport estimand_report(const PosteriorSamples& samples, const AlignedDataset& ds,
                             const ExposureSeries& exposure, const ModelSpec& spec_in,
                             double total_population, double period_days) {
  check_inputs(samples, ds, exposure);
  const ModelSpec spec = spec_for(samples, spec_in);
  EffectReport rep;
  rep.method = EffectMethod::estimand;
  rep.total_population = total_population;
  rep.period_days = period_days;
  rep.ate_draws.reserve(samples.num_draws());
  rep.delta_v_draws.reserve(samples.num_draws());
  for (std::size_t s = 0; s < samples.num_draws(); ++s) {
    const auto m = inner_means(samples.params(s), ds, exposure, spec);
    rep.ate_draws.push_back(-m.inner);
    rep.delta_v_draws.push_back(total_population * period_days * m.exposed);
  }
  rep.draws_used = samples.num_draws();
  rep.ate = mean(rep.ate_draws);
  rep.ate_ci = hdi(rep.ate_draws);
  rep.delta_v = mean(rep.delta_v_draws);
  rep.delta_v_ci = hdi(rep.delta_v_draws);
  rep.tail_p = tail_probability(rep.ate_draws, 0.0, TailDirection::less);
  return rep;
}

}  // namespace

std::string_view to_string(EffectMethod method) {
  return method == EffectMethod::estimand ? "estimand" : "counterfactual";
}

EffectReport estimate_ate(const PosteriorSamples& samples, const AlignedDataset& dataset,
                          const ExposureSeries& exposure, const ModelSpec& spec) {
  EffectReport rep = estimand_report(samples, dataset, exposure, spec, 0.0, 0.0);
  rep.delta_v_draws.clear();
  rep.delta_v = 0.0;
  rep.delta_v_ci = {};
  return rep;
}

EffectReport prevented_vaccinations(const PosteriorSamples& samples, const AlignedDataset& dataset,
                                    const ExposureSeries& exposure, const ModelSpec& spec,
                                    double total_population, double period_days) {
  if (!(total_population > 0.0)) throw InvalidInput("total population must be positive");
  if (period_days < 0.0) throw InvalidInput("period_days must be non-negative");
  if (period_days == 0.0)
    period_days = static_cast<double>((dataset.num_intervals() - std::min(dataset.first_observed, dataset.num_intervals())) *
                                      static_cast<std::size_t>(spec.interval_days));
  return estimand_report(samples, dataset, exposure, spec, total_population, period_days);
}

EffectReport counterfactual_delta_v(const PosteriorSamples& samples, const AlignedDataset& ds,
                                    const ExposureSeries& exposure, const ModelSpec& spec_in,
                                    double total_population) {
  if (!(total_population > 0.0)) throw InvalidInput("total population must be positive");
  check_inputs(samples, ds, exposure);
  const ModelSpec spec = spec_for(samples, spec_in);
  const std::size_t k0 = ds.first_observed;
  const std::size_t horizon = ds.num_intervals() - k0;
  const double scale = total_population / total_population_of(ds);

  EffectReport rep;
  rep.method = EffectMethod::counterfactual;
  rep.total_population = total_population;
  rep.period_days = static_cast<double>(horizon * static_cast<std::size_t>(spec.interval_days));
  const std::vector<double> zeros(horizon, 0.0);
  for (std::size_t s = 0; s < samples.num_draws(); ++s) {
    const ModelParams p = samples.params(s);
    double diff = 0.0;
    try {
      for (std::size_t i = 0; i < ds.regions.size(); ++i) {
        const auto& r = ds.regions[i];
        const auto e = exposure_row(exposure, i);
        const auto alpha = reconstruct_alpha(p, spec, i, e, k0);
        const EpidemicState start{r.susceptible[k0], r.infected[k0], r.recovered[k0], r.vaccinated[k0],
                                  alpha[k0], r.population};
        const auto with_e = simulate(start, p, spec, std::span<const double>(e).subspan(k0), horizon, k0);
        const auto without = simulate(start, p, spec, zeros, horizon, k0);
        diff += without.states.back().V - with_e.states.back().V;
      }
    } catch (const InvalidInput&) {
      diff = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(diff)) {
      ++rep.draws_excluded;
      continue;
    }
    rep.delta_v_draws.push_back(scale * diff);
  }
  rep.draws_used = rep.delta_v_draws.size();
  if (rep.draws_used == 0) throw NumericalError("every counterfactual simulation failed");
  rep.delta_v = mean(rep.delta_v_draws);
  rep.delta_v_ci = hdi(rep.delta_v_draws);
  rep.tail_p = tail_probability(rep.delta_v_draws, 0.0, TailDirection::greater);
  return rep;
}

ShuffleNullResult shuffle_null_test(const PosteriorSamples& samples) {
  const auto draws = samples.column("gamma_e");
  ShuffleNullResult r;
  r.tail_p = tail_probability(draws, 0.0, TailDirection::greater);
  r.gamma_e_hdi = hdi(draws);
  r.passes = r.gamma_e_hdi.contains(0.0);
  return r;
}

}  // namespace hesitancy
