#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hesitancy/data_io.hpp"
#include "hesitancy/dual.hpp"
#include "hesitancy/exposure.hpp"

namespace hesitancy {

// sirva: hesitancy ratio driven by exposure and a baseline drift.
// sirv: no hesitancy (alpha == 0).
// sirva_static: alpha fixed at its initial value.
// sirva_wom: sirva plus a word-of-mouth feedback gamma_a * alpha.
enum class ModelVariant { sirva, sirv, sirva_static, sirva_wom };

ModelVariant parse_variant(std::string_view name);
std::string_view to_string(ModelVariant variant);

constexpr bool has_alpha(ModelVariant v) { return v != ModelVariant::sirv; }
constexpr bool has_dynamic_alpha(ModelVariant v) {
  return v == ModelVariant::sirva || v == ModelVariant::sirva_wom;
}

struct ModelSpec {
  ModelVariant variant = ModelVariant::sirva;
  int interval_days = 8;
  int substeps = 8;  // Euler sub-steps per interval
  int beta_period_intervals = 3;
  int nu_period_intervals = 6;

  double dt_days() const { return static_cast<double>(interval_days) / substeps; }
  std::size_t beta_periods(std::size_t intervals) const {
    return (intervals + beta_period_intervals - 1) / beta_period_intervals;
  }
  std::size_t nu_periods(std::size_t intervals) const {
    return (intervals + nu_period_intervals - 1) / nu_period_intervals;
  }
  void validate() const;
};

// Channels of the observation model, in storage order.
enum Channel : int { kCases = 0, kVaccinations = 1, kRecovered = 2, kSusceptible = 3 };
inline constexpr std::array<std::string_view, 4> kChannelNames{"C", "V", "R", "S"};

struct ModelParams {
  std::vector<double> beta;  // one per beta period, per day
  double rho = 0.1;
  std::vector<double> nu;  // one per nu period, per day
  double gamma_e = 0.0;
  double gamma_p = 0.0;
  double gamma_a = 0.0;
  std::vector<double> alpha0;  // one per region, in dataset order
  std::array<double, 4> phi{10.0, 10.0, 10.0, 10.0};

  // Throws InvalidInput on a violated invariant.
  void validate(ModelVariant variant) const;
};

// Rates in force during one interval.
struct Rates {
  double beta = 0.0;
  double rho = 0.0;
  double nu = 0.0;
  double gamma_e = 0.0;
  double gamma_p = 0.0;
  double gamma_a = 0.0;
};

Rates rates_at(const ModelParams& params, const ModelSpec& spec, std::size_t interval);

struct EpidemicState {
  double S = 0.0;
  double I = 0.0;
  double R = 0.0;
  double V = 0.0;
  double alpha = 0.0;
  double N = 0.0;
};

// One explicit Euler step of length dt_days.
EpidemicState step(const EpidemicState& state, const Rates& rates, double exposure, double dt_days,
                   ModelVariant variant);

struct IntervalDeltas {
  double cases = 0.0;
  double vaccinations = 0.0;
  double recovered = 0.0;
  double susceptible_outflow = 0.0;
};

struct Trajectory {
  std::vector<EpidemicState> states;  // horizon + 1 boundaries
  std::vector<IntervalDeltas> deltas;  // horizon intervals
};

// Integrates `horizon` intervals starting at absolute interval index
// `start_interval` (which selects the beta/nu periods). exposure[k] is the
// exposure during interval start_interval + k.
Trajectory simulate(const EpidemicState& initial, const ModelParams& params, const ModelSpec& spec,
                    std::span<const double> exposure, std::size_t horizon,
                    std::size_t start_interval = 0);

struct RegionInit {
  std::string region_id;
  double population = 0.0;
  double cum_cases = 0.0;
  double infected = 0.0;
  double vaccinated = 0.0;
};

enum class SyntheticMode {
  // Simulate the noise-free trajectory, then perturb its interval deltas.
  free_running,
  // Draw each interval from the model started at the previously observed state.
  one_step,
};

struct SyntheticOptions {
  SyntheticMode mode = SyntheticMode::one_step;
  double death_fraction = 0.01;
  Date start_date = parse_date("2021-02-06");
};

// Draws a dataset from the observation model. Each region gets a self-loop
// network edge and daily post counts that reproduce `exposure`.
AlignedDataset generate_synthetic(const ModelParams& params, const ModelSpec& spec,
                                  std::span<const RegionInit> regions, const ExposureSeries& exposure,
                                  std::size_t intervals, std::uint64_t seed,
                                  const SyntheticOptions& options = {});

// `trajectory.csv`: region_id,interval_index,S,I,R,V,alpha.
void write_trajectory_csv(const std::filesystem::path& path, std::span<const std::string> region_ids,
                          std::span<const Trajectory> trajectories);

// Negative binomial draw with mean mu and dispersion phi (gamma-Poisson mixture).
template <class Engine>
double draw_neg_binomial(Engine& rng, double mu, double phi);

namespace kernel {

template <typename T>
struct State {
  T S, I, R, V, alpha;
};

template <typename T>
struct RatesT {
  T beta, rho, nu, gamma_e, gamma_p, gamma_a;
};

template <typename T>
struct Deltas {
  T cases{}, vaccinations{}, recovered{};
};

template <typename T>
T clamp01(const T& x) {
  if (value_of(x) < 0.0) return T(0.0);
  if (value_of(x) > 1.0) return T(1.0);
  return x;
}

// Euler step. Outflows are capped at the mass of their source compartment.
template <typename T>
void substep(State<T>& s, const RatesT<T>& r, double n, double exposure, double dt,
             ModelVariant variant, Deltas<T>& acc) {
  T infections = r.beta * s.I * s.S * (dt / n);
  T vaccinations = r.nu * s.S * (1.0 - s.alpha) * dt;
  const double outflow = value_of(infections) + value_of(vaccinations);
  if (outflow > value_of(s.S)) {
    infections = s.S * (infections / (infections + vaccinations));
    vaccinations = s.S - infections;
  }
  T recoveries = r.rho * s.I * dt;
  if (value_of(recoveries) > value_of(s.I)) recoveries = s.I;

  s.S = (s.S - infections) - vaccinations;
  s.I = s.I + infections - recoveries;
  s.R += recoveries;
  s.V += vaccinations;
  acc.cases += infections;
  acc.vaccinations += vaccinations;
  acc.recovered += recoveries;

  if (has_dynamic_alpha(variant)) {
    T gamma = r.gamma_p + r.gamma_e * exposure;
    if (variant == ModelVariant::sirva_wom) gamma += r.gamma_a * s.alpha;
    s.alpha = clamp01(s.alpha + gamma * (1.0 - s.alpha) * dt);
  }
}

template <typename T>
Deltas<T> integrate_interval(State<T>& s, const RatesT<T>& r, double n, double exposure,
                             const ModelSpec& spec) {
  Deltas<T> acc;
  const double dt = spec.dt_days();
  for (int k = 0; k < spec.substeps; ++k) substep(s, r, n, exposure, dt, spec.variant, acc);
  return acc;
}

// Hesitancy ratio only: same update as `substep`, without compartments.
template <typename T>
T advance_alpha(T alpha, const RatesT<T>& r, double exposure, const ModelSpec& spec) {
  if (!has_dynamic_alpha(spec.variant)) return alpha;
  const double dt = spec.dt_days();
  for (int k = 0; k < spec.substeps; ++k) {
    T gamma = r.gamma_p + r.gamma_e * exposure;
    if (spec.variant == ModelVariant::sirva_wom) gamma += r.gamma_a * alpha;
    alpha = clamp01(alpha + gamma * (1.0 - alpha) * dt);
  }
  return alpha;
}

}  // namespace kernel

template <class Engine>
double draw_neg_binomial(Engine& rng, double mu, double phi) {
  std::gamma_distribution<double> gamma(phi, mu / phi);
  const double rate = gamma(rng);
  if (rate <= 0.0) return 0.0;
  std::poisson_distribution<long long> poisson(rate);
  return static_cast<double>(poisson(rng));
}

}  // namespace hesitancy
