#include "hesitancy/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "hesitancy/error.hpp"

namespace hesitancy {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw InvalidInput("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput("config: '" + where + "." + key + "' has the wrong type");
  }
}

std::vector<double> read_vector(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw InvalidInput("config: '" + where + "' must be a number or an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InvalidInput("config: '" + where + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

ModelParams read_params(const json& obj, ModelParams p, const std::string& where) {
  check_keys(obj, {"beta", "rho", "nu", "gamma_e", "gamma_p", "gamma_a", "alpha0", "phi"}, where);
  if (obj.contains("beta")) p.beta = read_vector(obj["beta"], where + ".beta");
  if (obj.contains("nu")) p.nu = read_vector(obj["nu"], where + ".nu");
  if (obj.contains("alpha0")) p.alpha0 = read_vector(obj["alpha0"], where + ".alpha0");
  read(obj, "rho", p.rho, where);
  read(obj, "gamma_e", p.gamma_e, where);
  read(obj, "gamma_p", p.gamma_p, where);
  read(obj, "gamma_a", p.gamma_a, where);
  if (obj.contains("phi")) {
    const auto phi = read_vector(obj["phi"], where + ".phi");
    if (phi.size() == 1) p.phi.fill(phi[0]);
    else if (phi.size() == 4) std::copy(phi.begin(), phi.end(), p.phi.begin());
    else throw InvalidInput("config: '" + where + ".phi' needs 1 or 4 values (C, V, R, S)");
  }
  return p;
}

std::array<double, 2> read_range(const json& v, const std::string& where) {
  const auto x = read_vector(v, where);
  if (x.size() == 1) return {x[0], x[0]};
  if (x.size() != 2) throw InvalidInput("config: '" + where + "' must be a number or [low, high]");
  return {x[0], x[1]};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  sampler.validate();
  if (load.interval_days != model.interval_days) throw InvalidInput("config: load and model interval lengths differ");
  if (load.max_fill_days < 0) throw InvalidInput("config: data.max_fill_days must be non-negative");
  if (effects.total_population < 0.0) throw InvalidInput("config: effects.total_population must be non-negative");
  if (effects.period_days < 0.0) throw InvalidInput("config: effects.period_days must be non-negative");
  for (double l : {effects.lambda_c, effects.lambda_d})
    if (!(l >= 0.0 && l <= 1.0)) throw InvalidInput("config: effects.lambda_c/lambda_d must lie in [0, 1]");
  for (const auto& x : {effects.delta_v, effects.p_case, effects.p_death})
    if (x && !(*x >= 0.0)) throw InvalidInput("config: effects overrides must be non-negative");
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  check_keys(j, {"paths", "seed", "model_variant", "interval_days", "beta_period_intervals", "nu_period_intervals",
                 "cleaning_policy", "model", "data", "sampler", "subsample", "effects", "simulate", "synth", "loo"},
             "config");
  RunConfig c;
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    check_keys(p, {"panel", "network", "output_dir"}, "paths");
    std::string s;
    if (p.contains("panel")) read(p, "panel", s, "paths"), c.panel = resolve(base, s);
    if (p.contains("network")) read(p, "network", s, "paths"), c.network = resolve(base, s);
    if (p.contains("output_dir")) read(p, "output_dir", s, "paths"), c.output_dir = resolve(base, s);
  } else {
    c.output_dir = resolve(base, "out");
  }
  read(j, "seed", c.seed, "config");
  c.sampler.seed = c.seed;
  if (j.contains("model_variant")) {
    std::string v;
    read(j, "model_variant", v, "config");
    c.model.variant = parse_variant(v);
  }
  // Flat keys and the "model"/"data" sections are equivalent; sections win.
  read(j, "interval_days", c.model.interval_days, "config");
  read(j, "beta_period_intervals", c.model.beta_period_intervals, "config");
  read(j, "nu_period_intervals", c.model.nu_period_intervals, "config");
  if (j.contains("cleaning_policy")) {
    std::string s;
    read(j, "cleaning_policy", s, "config");
    c.load.cleaning = parse_cleaning_policy(s);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, {"interval_days", "substeps", "beta_period_intervals", "nu_period_intervals"}, "model");
    read(m, "interval_days", c.model.interval_days, "model");
    read(m, "substeps", c.model.substeps, "model");
    read(m, "beta_period_intervals", c.model.beta_period_intervals, "model");
    read(m, "nu_period_intervals", c.model.nu_period_intervals, "model");
  }
  c.load.interval_days = c.model.interval_days;
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"cleaning", "max_fill_days"}, "data");
    if (d.contains("cleaning")) {
      std::string s;
      read(d, "cleaning", s, "data");
      c.load.cleaning = parse_cleaning_policy(s);
    }
    read(d, "max_fill_days", c.load.max_fill_days, "data");
  }
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    check_keys(s, {"chains", "warmup", "draws", "target_accept", "max_depth", "dense_metric", "laplace_init",
                   "adapt_metric", "threads"},
               "sampler");
    read(s, "chains", c.sampler.chains, "sampler");
    read(s, "warmup", c.sampler.warmup, "sampler");
    read(s, "draws", c.sampler.draws, "sampler");
    read(s, "target_accept", c.sampler.target_accept, "sampler");
    read(s, "max_depth", c.sampler.max_depth, "sampler");
    read(s, "dense_metric", c.sampler.dense_metric, "sampler");
    read(s, "laplace_init", c.sampler.laplace_init, "sampler");
    read(s, "adapt_metric", c.sampler.adapt_metric, "sampler");
    read(s, "threads", c.sampler.threads, "sampler");
  }
  if (j.contains("subsample")) {
    check_keys(j["subsample"], {"regions"}, "subsample");
    read(j["subsample"], "regions", c.subsample_regions, "subsample");
  }
  if (j.contains("effects")) {
    const auto& e = j["effects"];
    check_keys(e, {"total_population", "period_days", "lambda_c", "lambda_d", "denominator", "delta_v", "p_case",
                   "p_death"},
               "effects");
    read(e, "total_population", c.effects.total_population, "effects");
    read(e, "period_days", c.effects.period_days, "effects");
    read(e, "lambda_c", c.effects.lambda_c, "effects");
    read(e, "lambda_d", c.effects.lambda_d, "effects");
    if (e.contains("denominator")) {
      std::string s;
      read(e, "denominator", s, "effects");
      if (s == "period_end") c.effects.denominator = DenominatorTime::period_end;
      else if (s == "period_start") c.effects.denominator = DenominatorTime::period_start;
      else throw InvalidInput("config: effects.denominator must be 'period_end' or 'period_start'");
    }
    for (auto [key, slot] : {std::pair{"delta_v", &c.effects.delta_v}, std::pair{"p_case", &c.effects.p_case},
                             std::pair{"p_death", &c.effects.p_death}}) {
      if (!e.contains(key)) continue;
      double v = 0.0;
      read(e, key, v, "effects");
      *slot = v;
    }
  }
  if (j.contains("simulate")) {
    const auto& s = j["simulate"];
    check_keys(s, {"params", "regions", "exposure", "constant_exposure", "horizon"}, "simulate");
    if (s.contains("params")) c.simulate.params = read_params(s["params"], ModelParams{}, "simulate.params");
    if (s.contains("regions")) {
      if (!s["regions"].is_array()) throw InvalidInput("config: 'simulate.regions' must be an array");
      for (const auto& r : s["regions"]) {
        check_keys(r, {"id", "population", "cum_cases", "infected", "vaccinated"}, "simulate.regions[]");
        RegionInit ri;
        read(r, "id", ri.region_id, "simulate.regions[]");
        read(r, "population", ri.population, "simulate.regions[]");
        read(r, "cum_cases", ri.cum_cases, "simulate.regions[]");
        read(r, "infected", ri.infected, "simulate.regions[]");
        read(r, "vaccinated", ri.vaccinated, "simulate.regions[]");
        c.simulate.regions.push_back(ri);
      }
    }
    if (s.contains("exposure")) {
      if (!s["exposure"].is_object()) throw InvalidInput("config: 'simulate.exposure' must map region ids to series");
      for (const auto& [id, series] : s["exposure"].items())
        c.simulate.exposure[id] = read_vector(series, "simulate.exposure." + id);
    }
    read(s, "constant_exposure", c.simulate.constant_exposure, "simulate");
    read(s, "horizon", c.simulate.horizon, "simulate");
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, {"regions", "intervals", "population", "cases_fraction", "infected_fraction",
                   "vaccinated_fraction", "alpha0", "exposure_scale", "params"},
               "synth");
    read(s, "regions", c.synth.regions, "synth");
    read(s, "intervals", c.synth.intervals, "synth");
    if (s.contains("population")) c.synth.population = read_range(s["population"], "synth.population");
    read(s, "cases_fraction", c.synth.cases_fraction, "synth");
    read(s, "infected_fraction", c.synth.infected_fraction, "synth");
    read(s, "vaccinated_fraction", c.synth.vaccinated_fraction, "synth");
    if (s.contains("alpha0")) c.synth.alpha0 = read_range(s["alpha0"], "synth.alpha0");
    read(s, "exposure_scale", c.synth.exposure_scale, "synth");
    if (s.contains("params")) c.synth.params = read_params(s["params"], c.synth.params, "synth.params");
  }
  c.synth.spec = c.model;
  if (j.contains("loo")) {
    check_keys(j["loo"], {"posteriors"}, "loo");
    if (j["loo"].contains("posteriors")) {
      const auto& p = j["loo"]["posteriors"];
      if (!p.is_object()) throw InvalidInput("config: 'loo.posteriors' must map labels to posterior.csv paths");
      for (const auto& [label, path] : p.items()) {
        if (!path.is_string()) throw InvalidInput("config: 'loo.posteriors." + label + "' must be a path");
        c.loo_posteriors[label] = resolve(base, path.get<std::string>());
      }
    }
  }
  c.canonical = j.dump();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact(path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hesitancy
