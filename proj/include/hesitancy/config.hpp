#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hesitancy/data_io.hpp"
#include "hesitancy/dynamics.hpp"
#include "hesitancy/risk_attribution.hpp"
#include "hesitancy/sampler.hpp"
#include "hesitancy/synthetic.hpp"

namespace hesitancy {

struct EffectSettings {
  // 0: sum of the dataset's populations.
  double total_population = 0.0;
  // 0: the dataset's observed span.
  double period_days = 0.0;
  double lambda_c = 0.93;
  double lambda_d = 0.94;
  DenominatorTime denominator = DenominatorTime::period_end;
  // Overrides for the risk command; unset values are computed.
  std::optional<double> delta_v;
  std::optional<double> p_case;
  std::optional<double> p_death;
};

struct SimulateSettings {
  ModelParams params;
  std::vector<RegionInit> regions;
  // Per-region exposure by interval; a region without an entry gets `constant_exposure`.
  std::map<std::string, std::vector<double>> exposure;
  double constant_exposure = 0.0;
  std::size_t horizon = 0;
};

struct RunConfig {
  std::filesystem::path panel;
  std::filesystem::path network;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  ModelSpec model;
  LoadOptions load;
  SamplerConfig sampler;
  std::size_t subsample_regions = 0;  // 0 keeps every region
  EffectSettings effects;
  SimulateSettings simulate;
  SyntheticScenario synth;
  // Posterior files compared by the loo command, by label.
  std::map<std::string, std::filesystem::path> loo_posteriors;
  // Canonical JSON of the parsed configuration, used for the provenance hash.
  std::string canonical;

  void validate() const;
};

// Relative paths resolve against the config file's directory. Unknown keys
// are rejected. Throws ParseError for malformed JSON, InvalidInput otherwise.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {},
                       const std::string& source = "config");

// 64-bit FNV-1a of the canonical configuration, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace hesitancy
