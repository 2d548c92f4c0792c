#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hesitancy/dynamics.hpp"
#include "hesitancy/exposure.hpp"

namespace hesitancy {

// Recipe for a synthetic panel: random region sizes, initial states,
// initial hesitancy and exposure levels around fixed global rates.
struct SyntheticScenario {
  std::size_t regions = 50;
  std::size_t intervals = 24;
  std::array<double, 2> population{5e4, 1.5e5};  // uniform range
  double cases_fraction = 0.05;
  double infected_fraction = 0.005;
  double vaccinated_fraction = 0.10;
  std::array<double, 2> alpha0{0.1, 0.4};  // uniform range
  // Region level a_i ~ U(0, exposure_scale); interval values a_i * (0.5 + U(0, 1)).
  double exposure_scale = 0.01;
  // Global rates; alpha0 is filled per region by build_scenario.
  ModelParams params = default_params();
  ModelSpec spec;

  static ModelParams default_params();
  void validate() const;
};

struct SyntheticFixture {
  ModelParams truth;
  std::vector<RegionInit> inits;
  ExposureSeries exposure;
};

// Draws region sizes, alpha0 and exposure from the "synth" substream
// (index 1; index 0 is reserved for the observation noise).
SyntheticFixture build_scenario(const SyntheticScenario& scenario, std::uint64_t seed);

// build_scenario followed by generate_synthetic.
AlignedDataset generate_scenario(const SyntheticScenario& scenario, std::uint64_t seed,
                                 SyntheticFixture* fixture = nullptr);

}  // namespace hesitancy
