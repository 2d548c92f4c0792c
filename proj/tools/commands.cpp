#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "hesitancy/causal_effects.hpp"
#include "hesitancy/error.hpp"
#include "hesitancy/exposure.hpp"
#include "hesitancy/model_selection.hpp"
#include "hesitancy/posterior.hpp"
#include "hesitancy/reports.hpp"
#include "hesitancy/risk_attribution.hpp"
#include "hesitancy/sampler.hpp"
#include "hesitancy/synthetic.hpp"

namespace hesitancy::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Inputs {
  AlignedDataset dataset;
  ExposureSeries exposure;
};

// Dataset restricted to regions with defined exposure, optionally subsampled.
Inputs load_inputs(const RunConfig& c) {
  if (c.panel.empty() || c.network.empty())
    throw InvalidInput("config: paths.panel and paths.network are required for this command");
  if (!fs::exists(c.panel)) throw MissingArtifact(c.panel.string());
  if (!fs::exists(c.network)) throw MissingArtifact(c.network.string());
  Inputs in;
  AlignedDataset full = load_dataset(c.panel, c.network, c.load);
  // Exposure uses every source region, so it is computed before subsampling.
  const ExposureSeries exposure = compute_exposure(full);
  AlignedDataset ds = select_regions(full, exposure.region_ids);
  if (c.subsample_regions > 0 && c.subsample_regions < ds.num_regions())
    ds = subsample_regions(ds, c.subsample_regions, c.seed);
  const auto ids = ds.region_ids();
  in.exposure = select_exposure(exposure, ids);
  in.dataset = std::move(ds);
  return in;
}

Provenance provenance(const RunConfig& c, const AlignedDataset* ds = nullptr) {
  return {config_hash(c), c.seed, ds ? dataset_hash(*ds) : std::string()};
}

fs::path out_path(const RunConfig& c, const char* name) {
  fs::create_directories(c.output_dir);
  return c.output_dir / name;
}

PosteriorSamples read_posterior(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact(path.string());
  return read_posterior_csv(path);
}

double total_population(const RunConfig& c, const AlignedDataset& ds) {
  if (c.effects.total_population > 0.0) return c.effects.total_population;
  double n = 0.0;
  for (const auto& r : ds.regions) n += r.population;
  return n;
}

void report_diagnostics(const PosteriorSamples& s) {
  const auto& d = s.diagnostics;
  std::fprintf(stderr, "max R-hat %.4f, min ESS %.0f, divergent fraction %.4f\n", d.max_rhat, d.min_ess,
               d.divergent_fraction);
  if (d.rhat_warning) std::fprintf(stderr, "warning: R-hat above 1.01\n");
  if (d.divergence_warning) std::fprintf(stderr, "warning: more than 10%% divergent transitions\n");
}

json params_json(const ModelParams& p, const std::vector<std::string>& region_ids) {
  json alpha0 = json::object();
  for (std::size_t i = 0; i < p.alpha0.size() && i < region_ids.size(); ++i) alpha0[region_ids[i]] = p.alpha0[i];
  return {{"beta", p.beta}, {"rho", p.rho},         {"nu", p.nu},         {"gamma_e", p.gamma_e},
          {"gamma_p", p.gamma_p}, {"gamma_a", p.gamma_a}, {"alpha0", alpha0}, {"phi", p.phi}};
}

}  // namespace

RunConfig resolve_config(const CommonOptions& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  c.sampler.seed = c.seed;
  if (o.threads) c.sampler.threads = *o.threads;
  if (o.out) c.output_dir = *o.out;
  if (o.variant) c.model.variant = parse_variant(*o.variant);
  c.synth.spec = c.model;
  c.validate();
  return c;
}

int cmd_simulate(const RunConfig& c) {
  const auto& s = c.simulate;
  if (s.regions.empty()) throw InvalidInput("config: simulate.regions is empty");
  ModelParams params = s.params;
  if (!has_alpha(c.model.variant)) params.alpha0.clear();
  params.validate(c.model.variant);
  if (has_alpha(c.model.variant) && params.alpha0.size() != s.regions.size())
    throw InvalidInput("config: simulate.params.alpha0 needs one value per region");
  if (params.beta.size() < c.model.beta_periods(s.horizon) || params.nu.size() < c.model.nu_periods(s.horizon))
    throw InvalidInput("config: simulate.params beta/nu do not cover the horizon");
  std::vector<std::string> ids;
  std::vector<Trajectory> trajectories;
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    const auto& r = s.regions[i];
    if (!(r.population > 0.0) || r.infected > r.cum_cases || r.cum_cases + r.vaccinated > r.population)
      throw InvalidInput("config: inconsistent initial state for region " + r.region_id);
    std::vector<double> e(s.horizon, s.constant_exposure);
    if (auto it = s.exposure.find(r.region_id); it != s.exposure.end()) {
      if (it->second.size() < s.horizon) throw InvalidInput("config: exposure for " + r.region_id + " is shorter than the horizon");
      e = it->second;
    }
    const double alpha0 = has_alpha(c.model.variant) ? params.alpha0[i] : 0.0;
    const EpidemicState init{r.population - r.cum_cases - r.vaccinated, r.infected, r.cum_cases - r.infected,
                             r.vaccinated, alpha0, r.population};
    ids.push_back(r.region_id);
    trajectories.push_back(simulate(init, params, c.model, e, s.horizon));
  }
  write_trajectory_csv(out_path(c, "trajectory.csv"), ids, trajectories);
  return kOk;
}

int cmd_synth(const RunConfig& c) {
  SyntheticFixture fixture;
  const AlignedDataset ds = generate_scenario(c.synth, c.seed, &fixture);
  write_panel_csv(out_path(c, "panel.csv"), ds.panels);
  write_network_csv(out_path(c, "network.csv"), ds.network);
  write_exposure_csv(out_path(c, "exposure.csv"), fixture.exposure);
  json truth = {{"variant", std::string(to_string(c.model.variant))},
                {"params", params_json(fixture.truth, fixture.exposure.region_ids)}};
  write_report(out_path(c, "truth.json"), truth, provenance(c, &ds));
  return kOk;
}

int cmd_fit(const RunConfig& c, bool allow_bad) {
  const Inputs in = load_inputs(c);
  const PosteriorSamples s = sample_posterior(in.dataset, in.exposure, c.model, PriorSpec{}, c.sampler);
  write_posterior_csv(out_path(c, "posterior.csv"), s);
  write_report(out_path(c, "diagnostics.json"), diagnostics_json(s), provenance(c, &in.dataset));
  report_diagnostics(s);
  if (!s.diagnostics.ok() && !allow_bad) {
    std::fprintf(stderr, "diagnostics failed; rerun with --allow-bad-diagnostics to accept\n");
    return kDiagnosticsFailure;
  }
  return kOk;
}

int cmd_ate(const RunConfig& c) {
  const PosteriorSamples s = read_posterior(c.output_dir / "posterior.csv");
  const Inputs in = load_inputs(c);
  const EffectReport rep = prevented_vaccinations(s, in.dataset, in.exposure, c.model,
                                                  total_population(c, in.dataset), c.effects.period_days);
  write_report(out_path(c, "effect.json"), to_json(rep), provenance(c, &in.dataset));
  std::printf("ATE %.6g [%.6g, %.6g]; prevented vaccinations %.6g [%.6g, %.6g]\n", *rep.ate, rep.ate_ci->lower,
              rep.ate_ci->upper, rep.delta_v, rep.delta_v_ci.lower, rep.delta_v_ci.upper);
  return kOk;
}

int cmd_counterfactual(const RunConfig& c) {
  const PosteriorSamples s = read_posterior(c.output_dir / "posterior.csv");
  const Inputs in = load_inputs(c);
  const EffectReport rep = counterfactual_delta_v(s, in.dataset, in.exposure, c.model, total_population(c, in.dataset));
  json body = to_json(rep);
  const fs::path effect = c.output_dir / "effect.json";
  if (fs::exists(effect)) {
    const EffectReport est = effect_from_json(read_report(effect));
    body["estimand_delta_v"] = est.delta_v;
    body["relative_difference"] = rep.delta_v != 0.0 ? json(std::abs(est.delta_v - rep.delta_v) / std::abs(rep.delta_v))
                                                     : json(nullptr);
  }
  write_report(out_path(c, "counterfactual.json"), body, provenance(c, &in.dataset));
  std::printf("counterfactual prevented vaccinations %.6g [%.6g, %.6g] (%zu draws, %zu excluded)\n", rep.delta_v,
              rep.delta_v_ci.lower, rep.delta_v_ci.upper, rep.draws_used, rep.draws_excluded);
  return kOk;
}

int cmd_risk(const RunConfig& c) {
  const auto& e = c.effects;
  RiskInputs inputs;
  inputs.lambda_c = e.lambda_c;
  inputs.lambda_d = e.lambda_d;
  std::optional<AlignedDataset> ds;
  if (!e.p_case || !e.p_death) {
    ds = load_inputs(c).dataset;
    inputs = risk_inputs_from(national_series(*ds), e.lambda_c, e.lambda_d, e.denominator);
  }
  const double p_case = e.p_case ? *e.p_case : unvaccinated_case_risk(inputs);
  const double p_death = e.p_death ? *e.p_death : unvaccinated_death_risk(inputs);
  double delta_v = 0.0;
  if (e.delta_v) {
    delta_v = *e.delta_v;
  } else {
    const EffectReport est = effect_from_json(read_report(c.output_dir / "effect.json"));
    delta_v = est.delta_v;
  }
  if (delta_v < 0.0) throw InvalidInput("prevented vaccinations are negative; attribution is undefined");
  const AttributionReport a = attribute_outcomes(delta_v, p_case, p_death);
  write_report(out_path(c, "risk.json"), risk_json(inputs, a), provenance(c, ds ? &*ds : nullptr));
  std::printf("P(case | unvaccinated) %.6g, P(death | unvaccinated) %.6g\n", p_case, p_death);
  std::printf("attributable cases %.1f, attributable deaths %.2f\n", a.attributable_cases, a.attributable_deaths);
  return kOk;
}

int cmd_loo(const RunConfig& c) {
  std::map<std::string, fs::path> posteriors = c.loo_posteriors;
  if (posteriors.empty()) posteriors[std::string(to_string(c.model.variant))] = c.output_dir / "posterior.csv";
  const Inputs in = load_inputs(c);
  std::vector<NamedElpd> reports;
  json models = json::array();
  for (const auto& [label, path] : posteriors) {
    const PosteriorSamples s = read_posterior(path);
    NamedElpd r{label, psis_loo(pointwise_loglik(s, in.dataset, in.exposure, c.model))};
    json m = to_json(r.report);
    m["model"] = label;
    models.push_back(m);
    std::printf("%s: elpd_loo %.2f (se %.2f), %zu points with k > 0.7\n", label.c_str(), r.report.elpd_loo,
                r.report.se, r.report.n_bad_k);
    reports.push_back(std::move(r));
  }
  const Provenance prov = provenance(c, &in.dataset);
  write_report(out_path(c, "elpd.json"), {{"models", models}}, prov);
  if (reports.size() > 1) write_report(out_path(c, "compare.json"), to_json(compare_models(reports)), prov);
  return kOk;
}

int cmd_shuffle_test(const RunConfig& c, bool allow_bad) {
  if (!has_dynamic_alpha(c.model.variant)) throw InvalidInput("shuffle test needs a variant with gamma_e");
  Inputs in = load_inputs(c);
  const ExposureSeries shuffled = shuffle_exposure(in.exposure, c.seed);
  const PosteriorSamples s = sample_posterior(in.dataset, shuffled, c.model, PriorSpec{}, c.sampler);
  write_posterior_csv(out_path(c, "posterior_shuffled.csv"), s);
  const ShuffleNullResult r = shuffle_null_test(s);
  json body = to_json(r);
  body["diagnostics"] = diagnostics_json(s);
  write_report(out_path(c, "shuffle_test.json"), body, provenance(c, &in.dataset));
  std::printf("gamma_e HDI on shuffled exposure [%.4g, %.4g]; covers 0: %s\n", r.gamma_e_hdi.lower,
              r.gamma_e_hdi.upper, r.passes ? "yes" : "no");
  report_diagnostics(s);
  if (!s.diagnostics.ok() && !allow_bad) return kDiagnosticsFailure;
  return kOk;
}

}  // namespace hesitancy::cli
