#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hesitancy/config.hpp"
#include "hesitancy/error.hpp"
#include "hesitancy/reports.hpp"

using namespace hesitancy;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EffectReport sample_effect() {
  EffectReport r;
  r.method = EffectMethod::estimand;
  r.ate = -3.2e-4;
  r.ate_ci = Interval{-3.8e-4, -2.6e-4};
  r.delta_v = 14086.123456789;
  r.delta_v_ci = {11414.5, 16759.25};
  r.delta_v_draws = {1.0};
  r.tail_p = 1.0 / 4001.0;
  r.draws_used = 4000;
  r.total_population = 337e6;
  r.period_days = 192;
  return r;
}

}  // namespace

TEST_CASE("flat and sectioned config keys are equivalent") {
  const RunConfig flat = parse_config(R"({"interval_days": 7, "beta_period_intervals": 2, "nu_period_intervals": 4,
                                         "cleaning_policy": "drop", "seed": 9, "model_variant": "sirv",
                                         "sampler": {"chains": 3, "warmup": 10, "draws": 20}})");
  const RunConfig nested = parse_config(R"({"model": {"interval_days": 7, "beta_period_intervals": 2,
                                                      "nu_period_intervals": 4},
                                           "data": {"cleaning": "drop"}, "seed": 9, "model_variant": "sirv",
                                           "sampler": {"chains": 3, "warmup": 10, "draws": 20}})");
  for (const RunConfig* c : {&flat, &nested}) {
    CHECK(c->model.interval_days == 7);
    CHECK(c->load.interval_days == 7);
    CHECK(c->model.beta_period_intervals == 2);
    CHECK(c->model.nu_period_intervals == 4);
    CHECK(c->load.cleaning == CleaningPolicy::drop);
    CHECK(c->seed == 9);
    CHECK(c->sampler.seed == 9);
    CHECK(c->model.variant == ModelVariant::sirv);
    CHECK(c->sampler.chains == 3);
  }
}

TEST_CASE("config errors are specific") {
  CHECK_THROWS_AS(parse_config("{\"seeed\": 1}"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{\"sampler\": {\"chain\": 2}}"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{\"model_variant\": \"sirx\"}"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{\"seed\": \"one\"}"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{\"sampler\": {\"chains\": 1}}"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{not json"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), MissingArtifact);
}

TEST_CASE("relative paths resolve against the config directory") {
  const RunConfig c = parse_config(R"({"paths": {"panel": "data/panel.csv", "network": "/abs/net.csv", "output_dir": "run"}})",
                                    "/work/exp");
  CHECK(c.panel == std::filesystem::path("/work/exp/data/panel.csv"));
  CHECK(c.network == std::filesystem::path("/abs/net.csv"));
  CHECK(c.output_dir == std::filesystem::path("/work/exp/run"));
}

TEST_CASE("config hash is stable and sensitive") {
  const RunConfig a = parse_config(R"({"seed": 1, "sampler": {"draws": 10, "warmup": 10}})");
  const RunConfig b = parse_config(R"({"sampler": {"warmup": 10, "draws": 10}, "seed": 1})");
  const RunConfig c = parse_config(R"({"seed": 2, "sampler": {"draws": 10, "warmup": 10}})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("effect report round-trips through JSON") {
  const EffectReport r = sample_effect();
  const EffectReport back = effect_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.method == r.method);
  CHECK(*back.ate == *r.ate);
  CHECK(back.ate_ci->lower == r.ate_ci->lower);
  CHECK(back.delta_v == r.delta_v);
  CHECK(back.delta_v_ci.upper == r.delta_v_ci.upper);
  CHECK(back.tail_p == r.tail_p);
  CHECK(back.draws_used == r.draws_used);
  CHECK(back.period_days == r.period_days);
  CHECK_THROWS_AS(effect_from_json(nlohmann::json{{"method", "guess"}}), InvalidInput);
}

TEST_CASE("reports re-serialize byte-identically and carry provenance") {
  const auto dir = std::filesystem::temp_directory_path() / "hesitancy_reports";
  std::filesystem::create_directories(dir);
  const Provenance prov{"0123456789abcdef", 7, "fedcba9876543210"};

  ElpdReport elpd;
  elpd.elpd_loo = -171600.25;
  elpd.se = 700.5;
  elpd.pointwise = {-1.5, -2.25};
  elpd.pareto_k = {0.2, 0.8};
  elpd.n_bad_k = 1;
  elpd.points = {{"a", 1, kCases}, {"a", 1, kVaccinations}};

  for (const auto& [name, body] : {std::pair{"effect.json", to_json(sample_effect())},
                                   std::pair{"elpd.json", to_json(elpd)}}) {
    const auto p1 = dir / name;
    const auto p2 = dir / (std::string("again_") + name);
    write_report(p1, body, prov);
    nlohmann::json j = read_report(p1);
    CHECK(j.at("provenance").at("config_hash") == "0123456789abcdef");
    CHECK(j.at("provenance").at("seed") == 7);
    CHECK_FALSE(j.at("provenance").contains("timestamp"));
    j.erase("provenance");
    write_report(p2, j, prov);
    CHECK(slurp(p1) == slurp(p2));
  }
  const nlohmann::json e = read_report(dir / "elpd.json");
  CHECK(e.at("n_bad_k") == 1);
  CHECK(e.at("elpd_loo") == -171600.25);

  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(read_report(dir / "broken.json"), ParseError);
  CHECK_THROWS_AS(read_report(dir / "absent.json"), MissingArtifact);
  std::filesystem::remove_all(dir);
}
