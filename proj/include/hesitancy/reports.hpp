#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hesitancy/causal_effects.hpp"
#include "hesitancy/data_io.hpp"
#include "hesitancy/model_selection.hpp"
#include "hesitancy/risk_attribution.hpp"
#include "hesitancy/sampler.hpp"

namespace hesitancy {

inline constexpr const char* kVersion = "0.1.0";

// Reports carry no timestamps, so equal inputs give byte-identical files.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string dataset_hash;  // empty when no dataset was involved
};

nlohmann::json to_json(const Provenance& provenance);
nlohmann::json to_json(const EffectReport& report);
nlohmann::json to_json(const ShuffleNullResult& result);
nlohmann::json to_json(const ElpdReport& report);
nlohmann::json to_json(const ModelComparison& comparison);
nlohmann::json risk_json(const RiskInputs& inputs, const AttributionReport& attribution);
// R-hat, ESS and per-chain sampler statistics.
nlohmann::json diagnostics_json(const PosteriorSamples& samples);

// Reads back the summary fields written by to_json(EffectReport).
EffectReport effect_from_json(const nlohmann::json& j);

// 64-bit FNV-1a over region ids, populations and observed series.
std::string dataset_hash(const AlignedDataset& dataset);

// Writes `body` with a provenance block, pretty-printed, trailing newline.
void write_report(const std::filesystem::path& path, nlohmann::json body, const Provenance& provenance);
// Throws MissingArtifact when absent, ParseError when malformed.
nlohmann::json read_report(const std::filesystem::path& path);

}  // namespace hesitancy
