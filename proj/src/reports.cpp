#include "hesitancy/reports.hpp"

#include <boost/version.hpp>
#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hesitancy/error.hpp"

namespace hesitancy {

using nlohmann::json;

namespace {

json interval_json(const Interval& i) { return json::array({i.lower, i.upper}); }

Interval interval_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("effect report: interval must be [lower, upper]");
  return {j[0].get<double>(), j[1].get<double>()};
}

class Fnv {
 public:
  void add(std::string_view s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
    add_sep();
  }
  void add(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    add(std::string_view(buf));
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  void add_sep() {
    h_ ^= 0x1f;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

json to_json(const Provenance& p) {
  json j;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  if (!p.dataset_hash.empty()) j["dataset_hash"] = p.dataset_hash;
  j["versions"] = {
      {"hesitancy", kVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", BOOST_LIB_VERSION},
      {"compiler", __VERSION__},
  };
  return j;
}

json to_json(const EffectReport& r) {
  json j;
  j["method"] = std::string(to_string(r.method));
  if (r.ate) j["ate"] = *r.ate;
  if (r.ate_ci) j["ate_ci"] = interval_json(*r.ate_ci);
  if (!r.delta_v_draws.empty()) {
    j["delta_v"] = r.delta_v;
    j["delta_v_ci"] = interval_json(r.delta_v_ci);
    j["total_population"] = r.total_population;
    j["period_days"] = r.period_days;
  }
  j["tail_p"] = r.tail_p;
  j["draws_used"] = r.draws_used;
  j["draws_excluded"] = r.draws_excluded;
  return j;
}

EffectReport effect_from_json(const json& j) {
  EffectReport r;
  try {
    const std::string m = j.at("method").get<std::string>();
    if (m == "estimand") r.method = EffectMethod::estimand;
    else if (m == "counterfactual") r.method = EffectMethod::counterfactual;
    else throw InvalidInput("effect report: unknown method '" + m + "'");
    if (j.contains("ate")) r.ate = j["ate"].get<double>();
    if (j.contains("ate_ci")) r.ate_ci = interval_from(j["ate_ci"]);
    if (j.contains("delta_v")) {
      r.delta_v = j["delta_v"].get<double>();
      r.delta_v_ci = interval_from(j.at("delta_v_ci"));
      r.total_population = j.at("total_population").get<double>();
      r.period_days = j.at("period_days").get<double>();
    }
    r.tail_p = j.at("tail_p").get<double>();
    r.draws_used = j.at("draws_used").get<std::size_t>();
    r.draws_excluded = j.at("draws_excluded").get<std::size_t>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("effect report: ") + e.what());
  }
  return r;
}

json to_json(const ShuffleNullResult& r) {
  return {{"parameter", "gamma_e"},
          {"tail_p", r.tail_p},
          {"hdi", interval_json(r.gamma_e_hdi)},
          {"hdi_covers_zero", r.passes}};
}

json to_json(const ElpdReport& r) {
  // k bins: good (<= 0.5), ok (<= 0.7), bad (<= 1), very bad (> 1 or failed fit).
  std::size_t bins[4] = {0, 0, 0, 0};
  double k_max = -std::numeric_limits<double>::infinity();
  for (double k : r.pareto_k) {
    if (k <= 0.5) ++bins[0];
    else if (k <= 0.7) ++bins[1];
    else if (k <= 1.0) ++bins[2];
    else ++bins[3];
    if (std::isfinite(k)) k_max = std::max(k_max, k);
  }
  json j;
  j["elpd_loo"] = r.elpd_loo;
  j["se"] = r.se;
  j["n_points"] = r.pointwise.size();
  j["n_bad_k"] = r.n_bad_k;
  j["pareto_k_max"] = std::isfinite(k_max) ? json(k_max) : json(nullptr);
  j["k_histogram"] = {{"le_0.5", bins[0]}, {"le_0.7", bins[1]}, {"le_1", bins[2]}, {"gt_1", bins[3]}};
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const ModelComparison& c) {
  json ranking = json::array();
  for (const auto& e : c.ranking)
    ranking.push_back(
        {{"model", e.name}, {"elpd_loo", e.elpd_loo}, {"se", e.se}, {"elpd_diff", e.elpd_diff}, {"se_diff", e.se_diff}});
  json pairs = json::array();
  for (const auto& p : c.pairs)
    pairs.push_back({{"better", p.better}, {"worse", p.worse}, {"elpd_diff", p.elpd_diff}, {"se_diff", p.se_diff}});
  return {{"ranking", ranking}, {"pairwise", pairs}};
}

json risk_json(const RiskInputs& in, const AttributionReport& a) {
  json inputs;
  inputs["population"] = in.population;
  inputs["cases_total"] = in.cases_total;
  inputs["deaths_total"] = in.deaths_total;
  inputs["lambda_c"] = in.lambda_c;
  inputs["lambda_d"] = in.lambda_d;
  inputs["delta_cases"] = in.delta_cases;
  inputs["delta_deaths"] = in.delta_deaths;
  inputs["vaccinated"] = in.vaccinated;
  return {{"inputs", inputs},
          {"delta_v", a.delta_v},
          {"p_case_unvax", a.p_case_unvax},
          {"p_death_unvax", a.p_death_unvax},
          {"attributable_cases", a.attributable_cases},
          {"attributable_deaths", a.attributable_deaths}};
}

json diagnostics_json(const PosteriorSamples& s) {
  const auto& d = s.diagnostics;
  json params = json::array();
  for (std::size_t p = 0; p < s.names.size(); ++p)
    params.push_back({{"name", s.names[p]}, {"rhat", d.rhat[p]}, {"ess", d.ess[p]}});
  json chains = json::array();
  for (const auto& c : d.chains)
    chains.push_back({{"divergences", c.divergences},
                      {"warmup_divergences", c.warmup_divergences},
                      {"mean_accept", c.mean_accept},
                      {"step_size", c.step_size},
                      {"mean_tree_depth", c.mean_tree_depth},
                      {"max_depth_hits", c.max_depth_hits},
                      {"leapfrog_steps", c.leapfrog_steps}});
  return {{"num_chains", s.num_chains},
          {"draws_per_chain", s.draws_per_chain},
          {"max_rhat", d.max_rhat},
          {"min_ess", d.min_ess},
          {"divergent_fraction", d.divergent_fraction},
          {"divergence_warning", d.divergence_warning},
          {"rhat_warning", d.rhat_warning},
          {"ok", d.ok()},
          {"parameters", params},
          {"chains", chains}};
}

std::string dataset_hash(const AlignedDataset& ds) {
  Fnv h;
  h.add(static_cast<double>(ds.first_observed));
  for (const auto& d : ds.grid_dates) h.add(format_date(d));
  for (const auto& r : ds.regions) {
    h.add(r.region_id);
    h.add(r.population);
    for (const auto* series : {&r.susceptible, &r.infected, &r.recovered, &r.vaccinated})
      for (double x : *series) h.add(x);
    for (const auto& o : r.observed) {
      h.add(o.cases);
      h.add(o.vaccinations);
      h.add(o.recovered);
      h.add(o.susceptible_outflow);
    }
    for (double x : r.mean_daily_posts) h.add(x);
  }
  return h.hex();
}

void write_report(const std::filesystem::path& path, json body, const Provenance& provenance) {
  body["provenance"] = to_json(provenance);
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << body.dump(2) << '\n';
  if (!out) throw InvalidInput("failed writing " + path.string());
}

json read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact(path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

}  // namespace hesitancy
