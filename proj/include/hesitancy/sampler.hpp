#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hesitancy/diagnostics.hpp"
#include "hesitancy/posterior.hpp"

namespace hesitancy {

struct SamplerConfig {
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;
  double target_accept = 0.8;
  int max_depth = 10;
  bool dense_metric = false;
  // Start chains around the posterior mode with the Laplace covariance as the
  // initial metric; otherwise start from the moment-based initial point with
  // an identity metric.
  bool laplace_init = true;
  // Re-estimate the metric during warmup.
  bool adapt_metric = true;
  std::uint64_t seed = 1;
  // Worker threads for chains; 0 uses the hardware concurrency.
  int threads = 0;

  void validate() const;
};

struct ChainDiagnostics {
  int divergences = 0;
  int warmup_divergences = 0;
  double mean_accept = 0.0;
  double step_size = 0.0;
  double mean_tree_depth = 0.0;
  int max_depth_hits = 0;
  long long leapfrog_steps = 0;
};

struct Diagnostics {
  std::vector<double> rhat;  // per parameter
  std::vector<double> ess;   // per parameter
  std::vector<ChainDiagnostics> chains;
  double divergent_fraction = 0.0;
  double max_rhat = 1.0;
  double min_ess = 0.0;
  // Divergent-transition fraction above 10%.
  bool divergence_warning = false;
  // Some parameter has R-hat above 1.01.
  bool rhat_warning = false;

  bool ok() const { return !divergence_warning && !rhat_warning; }
};

struct PosteriorSamples {
  std::vector<std::string> names;
  std::size_t num_chains = 0;
  std::size_t draws_per_chain = 0;
  // Row chain * draws_per_chain + draw, one column per parameter, constrained scale.
  Eigen::MatrixXd values;
  Diagnostics diagnostics;

  std::size_t num_draws() const { return static_cast<std::size_t>(values.rows()); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  // Throws InvalidInput for an unknown parameter.
  std::vector<double> column(std::string_view name) const;
  ParameterLayout layout() const { return ParameterLayout::from_names(names); }
  ModelParams params(std::size_t row) const;
};

// Recomputes R-hat, ESS and warning flags from values and per-chain stats.
void update_diagnostics(PosteriorSamples& samples);

PosteriorSamples sample_posterior(const AlignedDataset& dataset, const ExposureSeries& exposure,
                                  const ModelSpec& spec, const PriorSpec& priors,
                                  const SamplerConfig& config);

enum class TailDirection {
  greater,  // evidence for parameter > threshold; violations are draws <= threshold
  less,     // evidence for parameter < threshold; violations are draws >= threshold
};

// Fraction of draws violating the direction, floored at 1 / (draws + 1).
double tail_probability(const PosteriorSamples& samples, std::string_view parameter, double threshold,
                        TailDirection direction);
double tail_probability(std::span<const double> draws, double threshold, TailDirection direction);

// `posterior.csv`: chain,draw,parameter,value (long format, %.17g).
void write_posterior_csv(const std::filesystem::path& path, const PosteriorSamples& samples);
// Reads values back; diagnostics are recomputed except per-chain sampler stats.
PosteriorSamples read_posterior_csv(const std::filesystem::path& path);

}  // namespace hesitancy
