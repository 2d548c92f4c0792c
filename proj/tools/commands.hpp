#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hesitancy/config.hpp"

namespace hesitancy::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kInvalidInput = 2;
inline constexpr int kMissingArtifact = 3;
inline constexpr int kDiagnosticsFailure = 4;

struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> variant;
  bool allow_bad_diagnostics = false;
};

// Loads the config and applies command-line overrides.
RunConfig resolve_config(const CommonOptions& options);

int cmd_simulate(const RunConfig& config);
int cmd_synth(const RunConfig& config);
int cmd_fit(const RunConfig& config, bool allow_bad_diagnostics);
int cmd_ate(const RunConfig& config);
int cmd_counterfactual(const RunConfig& config);
int cmd_risk(const RunConfig& config);
int cmd_loo(const RunConfig& config);
int cmd_shuffle_test(const RunConfig& config, bool allow_bad_diagnostics);

}  // namespace hesitancy::cli
