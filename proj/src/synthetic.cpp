#include "hesitancy/synthetic.hpp"

#include <cmath>
#include <string>

#include "hesitancy/error.hpp"
#include "hesitancy/rng.hpp"

namespace hesitancy {

ModelParams SyntheticScenario::default_params() {
  ModelParams p;
  p.beta = {0.12, 0.13, 0.11, 0.12, 0.125, 0.115, 0.12, 0.12};
  p.rho = 0.1;
  p.nu = {0.0025, 0.0025, 0.0025, 0.0025};
  p.gamma_e = 0.18;
  p.gamma_p = 0.005;
  p.phi = {50.0, 100.0, 50.0, 100.0};
  return p;
}

void SyntheticScenario::validate() const {
  spec.validate();
  if (regions == 0 || intervals == 0) throw InvalidInput("synthetic scenario needs regions and intervals");
  if (!(population[0] >= 1.0 && population[0] <= population[1]))
    throw InvalidInput("synthetic population range must be positive and ordered");
  if (!(alpha0[0] >= 0.0 && alpha0[0] <= alpha0[1] && alpha0[1] <= 1.0))
    throw InvalidInput("synthetic alpha0 range must lie in [0, 1] and be ordered");
  for (double f : {cases_fraction, infected_fraction, vaccinated_fraction})
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidInput("synthetic initial fractions must lie in [0, 1]");
  if (infected_fraction > cases_fraction) throw InvalidInput("infected fraction cannot exceed the cases fraction");
  if (cases_fraction + vaccinated_fraction > 1.0) throw InvalidInput("cases plus vaccinated fractions exceed 1");
  if (!(exposure_scale >= 0.0)) throw InvalidInput("exposure scale must be non-negative");
  if (params.beta.size() < spec.beta_periods(intervals) || params.nu.size() < spec.nu_periods(intervals))
    throw InvalidInput("synthetic beta/nu do not cover every period");
}

SyntheticFixture build_scenario(const SyntheticScenario& sc, std::uint64_t seed) {
  sc.validate();
  Rng rng = make_rng(seed, "synth", 1);
  SyntheticFixture f;
  f.truth = sc.params;
  f.truth.alpha0.clear();
  f.exposure.values.resize(static_cast<Eigen::Index>(sc.regions), static_cast<Eigen::Index>(sc.intervals));
  for (std::size_t i = 0; i < sc.regions; ++i) {
    const double n = std::round(sc.population[0] + (sc.population[1] - sc.population[0]) * uniform01(rng));
    const std::string id = "r" + std::to_string(i);
    f.inits.push_back({id, n, std::round(sc.cases_fraction * n), std::round(sc.infected_fraction * n),
                       std::round(sc.vaccinated_fraction * n)});
    f.truth.alpha0.push_back(sc.alpha0[0] + (sc.alpha0[1] - sc.alpha0[0]) * uniform01(rng));
    f.exposure.region_ids.push_back(id);
    const double level = sc.exposure_scale * uniform01(rng);
    for (std::size_t k = 0; k < sc.intervals; ++k)
      f.exposure.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = level * (0.5 + uniform01(rng));
  }
  if (!has_alpha(sc.spec.variant)) f.truth.alpha0.clear();
  return f;
}

AlignedDataset generate_scenario(const SyntheticScenario& sc, std::uint64_t seed, SyntheticFixture* out) {
  SyntheticFixture f = build_scenario(sc, seed);
  AlignedDataset ds = generate_synthetic(f.truth, sc.spec, f.inits, f.exposure, sc.intervals, seed);
  if (out) *out = std::move(f);
  return ds;
}

}  // namespace hesitancy
