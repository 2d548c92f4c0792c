#include "hesitancy/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hesitancy/error.hpp"
#include "hesitancy/rng.hpp"

namespace hesitancy {

namespace {

constexpr double kMeanFloor = 1e-6;

kernel::RatesT<double> to_kernel(const Rates& r) {
  return {r.beta, r.rho, r.nu, r.gamma_e, r.gamma_p, r.gamma_a};
}

double initial_alpha(const ModelParams& params, ModelVariant variant, std::size_t region) {
  if (!has_alpha(variant)) return 0.0;
  if (region >= params.alpha0.size()) throw InvalidInput("alpha0 missing for region " + std::to_string(region));
  return params.alpha0[region];
}

}  // namespace

ModelVariant parse_variant(std::string_view name) {
  if (name == "sirva") return ModelVariant::sirva;
  if (name == "sirv") return ModelVariant::sirv;
  if (name == "sirva_static") return ModelVariant::sirva_static;
  if (name == "sirva_wom") return ModelVariant::sirva_wom;
  throw InvalidInput("unknown model variant '" + std::string(name) +
                     "' (expected sirva, sirv, sirva_static or sirva_wom)");
}

std::string_view to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::sirva: return "sirva";
    case ModelVariant::sirv: return "sirv";
    case ModelVariant::sirva_static: return "sirva_static";
    case ModelVariant::sirva_wom: return "sirva_wom";
  }
  return "sirva";
}

void ModelSpec::validate() const {
  if (interval_days <= 0) throw InvalidInput("interval_days must be positive");
  if (substeps <= 0) throw InvalidInput("substeps must be positive");
  if (beta_period_intervals <= 0) throw InvalidInput("beta_period_intervals must be positive");
  if (nu_period_intervals <= 0) throw InvalidInput("nu_period_intervals must be positive");
}

void ModelParams::validate(ModelVariant variant) const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (beta.empty() || nu.empty()) throw InvalidInput("beta and nu need at least one period each");
  for (double b : beta)
    if (!positive(b)) throw InvalidInput("beta must be positive");
  for (double n : nu)
    if (!positive(n)) throw InvalidInput("nu must be positive");
  if (!positive(rho)) throw InvalidInput("rho must be positive");
  for (double p : phi)
    if (!positive(p)) throw InvalidInput("phi must be positive");
  if (!std::isfinite(gamma_e) || !std::isfinite(gamma_p) || !std::isfinite(gamma_a))
    throw InvalidInput("gamma coefficients must be finite");
  if (has_alpha(variant)) {
    for (double a : alpha0)
      if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("alpha0 must lie in [0, 1]");
  }
}

Rates rates_at(const ModelParams& params, const ModelSpec& spec, std::size_t interval) {
  const std::size_t b = interval / spec.beta_period_intervals;
  const std::size_t n = interval / spec.nu_period_intervals;
  if (b >= params.beta.size() || n >= params.nu.size()) {
    throw InvalidInput("interval " + std::to_string(interval) +
                       " is not covered by the piecewise beta/nu periods");
  }
  Rates r;
  r.beta = params.beta[b];
  r.rho = params.rho;
  r.nu = params.nu[n];
  r.gamma_e = params.gamma_e;
  r.gamma_p = params.gamma_p;
  r.gamma_a = params.gamma_a;
  return r;
}

EpidemicState step(const EpidemicState& state, const Rates& rates, double exposure, double dt_days,
                   ModelVariant variant) {
  if (!(dt_days > 0.0)) throw InvalidInput("dt_days must be positive");
  if (!(state.N > 0.0)) throw InvalidInput("population must be positive");
  kernel::State<double> s{state.S, state.I, state.R, state.V, has_alpha(variant) ? state.alpha : 0.0};
  kernel::Deltas<double> acc;
  kernel::substep(s, to_kernel(rates), state.N, exposure, dt_days, variant, acc);
  return {s.S, s.I, s.R, s.V, s.alpha, state.N};
}

Trajectory simulate(const EpidemicState& initial, const ModelParams& params, const ModelSpec& spec,
                    std::span<const double> exposure, std::size_t horizon, std::size_t start_interval) {
  spec.validate();
  if (exposure.size() < horizon) throw InvalidInput("exposure series shorter than the horizon");
  if (!(initial.N > 0.0)) throw InvalidInput("population must be positive");
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.deltas.reserve(horizon);
  traj.states.push_back(initial);
  if (!has_alpha(spec.variant)) traj.states.back().alpha = 0.0;

  kernel::State<double> s{initial.S, initial.I, initial.R, initial.V, traj.states.back().alpha};
  for (std::size_t k = 0; k < horizon; ++k) {
    const auto rates = to_kernel(rates_at(params, spec, start_interval + k));
    const double before = s.S;
    const auto d = kernel::integrate_interval(s, rates, initial.N, exposure[k], spec);
    traj.deltas.push_back({d.cases, d.vaccinations, d.recovered, before - s.S});
    traj.states.push_back({s.S, s.I, s.R, s.V, s.alpha, initial.N});
  }
  return traj;
}

AlignedDataset generate_synthetic(const ModelParams& params, const ModelSpec& spec,
                                  std::span<const RegionInit> regions, const ExposureSeries& exposure,
                                  std::size_t intervals, std::uint64_t seed,
                                  const SyntheticOptions& options) {
  spec.validate();
  params.validate(spec.variant);
  if (regions.empty()) throw InvalidInput("synthetic generation needs at least one region");
  if (exposure.num_regions() != regions.size() || exposure.num_intervals() < intervals)
    throw InvalidInput("exposure does not cover the synthetic regions and intervals");
  if (has_alpha(spec.variant) && params.alpha0.size() != regions.size())
    throw InvalidInput("alpha0 must have one entry per synthetic region");

  AlignedDataset ds;
  ds.interval_days = spec.interval_days;
  ds.lag_days = spec.interval_days;
  ds.first_observed = 0;
  for (std::size_t g = 0; g <= intervals; ++g)
    ds.grid_dates.push_back(options.start_date + std::chrono::days(g * spec.interval_days));

  auto rng = make_rng(seed, "synth");
  auto draw = [&](double mu, int channel) {
    return draw_neg_binomial(rng, std::max(mu, kMeanFloor), params.phi[channel]);
  };

  for (std::size_t i = 0; i < regions.size(); ++i) {
    const RegionInit& init = regions[i];
    if (!(init.population > 0.0)) throw InvalidInput("synthetic population must be positive");
    const double n = init.population;
    RegionSeries r;
    r.region_id = init.region_id;
    r.population = n;

    double c = init.cum_cases;
    double rec = init.cum_cases - init.infected;
    double v = init.vaccinated;
    if (rec < 0.0 || c + v > n) throw InvalidInput("inconsistent synthetic initial state");
    auto push_state = [&] {
      r.cum_cases.push_back(c);
      r.cum_deaths.push_back(std::round(options.death_fraction * c));
      r.vaccinated.push_back(v);
      r.recovered.push_back(rec);
      r.infected.push_back(c - rec);
      r.susceptible.push_back(n - c - v);
    };
    push_state();

    const auto row = exposure.values.row(static_cast<Eigen::Index>(i));
    std::vector<double> e(intervals);
    for (std::size_t k = 0; k < intervals; ++k) e[k] = row(static_cast<Eigen::Index>(k));

    const double alpha0 = initial_alpha(params, spec.variant, i);
    EpidemicState model{n - c - v, c - rec, rec, v, alpha0, n};
    double alpha = alpha0;

    for (std::size_t k = 0; k < intervals; ++k) {
      IntervalDeltas mu;
      if (options.mode == SyntheticMode::free_running) {
        auto t = simulate(model, params, spec, std::span<const double>(&e[k], 1), 1, k);
        mu = t.deltas.front();
        model = t.states.back();
      } else {
        EpidemicState observed{n - c - v, c - rec, rec, v, alpha, n};
        auto t = simulate(observed, params, spec, std::span<const double>(&e[k], 1), 1, k);
        mu = t.deltas.front();
        alpha = t.states.back().alpha;
      }
      IntervalObservation obs;
      obs.cases = draw(mu.cases, kCases);
      obs.vaccinations = draw(mu.vaccinations, kVaccinations);
      obs.recovered = draw(mu.recovered, kRecovered);
      obs.susceptible_outflow = draw(mu.susceptible_outflow, kSusceptible);

      // Keep the reconstructed cumulative series physically consistent.
      obs.cases = std::min(obs.cases, n - c - v);
      obs.vaccinations = std::min(obs.vaccinations, n - c - v - obs.cases);
      c += obs.cases;
      v += obs.vaccinations;
      obs.recovered = std::min(obs.recovered, c - rec);
      rec += obs.recovered;
      r.observed.push_back(obs);
      r.mean_daily_posts.push_back(e[k] * n);
      push_state();
    }
    ds.regions.push_back(std::move(r));
  }

  // Daily panels: cumulative series interpolated between grid points, posts
  // spread so each interval's total matches its grid-level mean.
  const std::size_t days = intervals * spec.interval_days + 1;
  for (const auto& r : ds.regions) {
    RegionPanel p;
    p.region_id = r.region_id;
    p.population = static_cast<std::int64_t>(std::llround(r.population));
    for (std::size_t d = 0; d < days; ++d) {
      const std::size_t g = d / spec.interval_days;
      const std::size_t off = d % spec.interval_days;
      auto interp = [&](const std::vector<double>& xs) {
        if (off == 0) return xs[g];
        const double w = static_cast<double>(off) / spec.interval_days;
        return std::floor(xs[g] + w * (xs[g + 1] - xs[g]));
      };
      p.dates.push_back(options.start_date + std::chrono::days(d));
      p.cum_cases.push_back(interp(r.cum_cases));
      p.cum_deaths.push_back(interp(r.cum_deaths));
      p.cum_vaccinations.push_back(interp(r.vaccinated));
      double posts = 0.0;
      if (g < intervals) {
        const double total = std::round(r.mean_daily_posts[g] * spec.interval_days);
        const double base = std::floor(total / spec.interval_days);
        const double extra = total - base * spec.interval_days;
        posts = base + (static_cast<double>(off) < extra ? 1.0 : 0.0);
      }
      p.antivax_posts.push_back(posts);
    }
    ds.panels.push_back(std::move(p));
    ds.network.edges.push_back({r.region_id, r.region_id, 1.0});
  }
  ds.network.normalize();
  return ds;
}

void write_trajectory_csv(const std::filesystem::path& path, std::span<const std::string> region_ids,
                          std::span<const Trajectory> trajectories) {
  if (region_ids.size() != trajectories.size())
    throw InvalidInput("one trajectory per region is required");
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "region_id,interval_index,S,I,R,V,alpha\n";
  char buf[256];
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& states = trajectories[i].states;
    // A zero-horizon trajectory has no intervals to report.
    if (states.size() < 2) continue;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto& s = states[k];
      std::snprintf(buf, sizeof buf, ",%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", k, s.S, s.I, s.R, s.V,
                    s.alpha);
      out << region_ids[i] << buf;
    }
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

}  // namespace hesitancy
