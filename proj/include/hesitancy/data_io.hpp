#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hesitancy {

using Date = std::chrono::sys_days;

Date parse_date(std::string_view iso);
std::string format_date(Date d);

// What to do with a cumulative series that decreases somewhere.
enum class CleaningPolicy { clip, strict, drop };

CleaningPolicy parse_cleaning_policy(std::string_view name);
std::string_view to_string(CleaningPolicy policy);

// Daily series for one region, as read from panel.csv.
struct RegionPanel {
  std::string region_id;
  std::int64_t population = 0;
  std::vector<Date> dates;
  std::vector<double> cum_cases;
  std::vector<double> cum_deaths;
  std::vector<double> cum_vaccinations;
  std::vector<double> antivax_posts;

  std::size_t size() const { return dates.size(); }
};

struct FlowEdge {
  std::string exposed_region;
  std::string source_region;
  double retweet_count = 0.0;
};

// Resharing counts W_ij, i = exposed (resharing) region, j = source region.
// Edges are kept sorted by (exposed, source) and unique.
struct FlowNetwork {
  std::vector<FlowEdge> edges;

  void normalize();
  double out_weight(std::string_view exposed) const;
};

// Observed increments over one interval (grid point t-1 to t):
// x_C = dC, x_V = dV, x_R = dR, x_S = -dS.
struct IntervalObservation {
  double cases = 0.0;
  double vaccinations = 0.0;
  double recovered = 0.0;
  double susceptible_outflow = 0.0;
};

// Grid-level view of one region.
struct RegionSeries {
  std::string region_id;
  double population = 0.0;
  // One entry per grid point.
  std::vector<double> cum_cases;
  std::vector<double> cum_deaths;
  std::vector<double> vaccinated;
  std::vector<double> recovered;
  std::vector<double> infected;
  std::vector<double> susceptible;
  // One entry per interval.
  std::vector<IntervalObservation> observed;
  std::vector<double> mean_daily_posts;
};

struct DroppedRegion {
  std::string region_id;
  std::string reason;
};

struct AlignedDataset {
  std::vector<RegionPanel> panels;  // cleaned daily series
  FlowNetwork network;
  int interval_days = 8;
  int lag_days = 8;
  // Grid points before this one have no lagged case count, so their
  // infected/recovered split is unknown; intervals starting there are not
  // used as observations.
  std::size_t first_observed = 0;
  std::vector<Date> grid_dates;
  std::vector<RegionSeries> regions;
  std::vector<DroppedRegion> dropped;

  std::size_t num_regions() const { return regions.size(); }
  std::size_t num_grid_points() const { return grid_dates.size(); }
  std::size_t num_intervals() const { return grid_dates.empty() ? 0 : grid_dates.size() - 1; }
  std::size_t num_observed_intervals() const;
  std::optional<std::size_t> find_region(std::string_view id) const;
  std::vector<std::string> region_ids() const;
};

struct LoadOptions {
  int interval_days = 8;
  CleaningPolicy cleaning = CleaningPolicy::clip;
  int max_fill_days = 3;
};

std::vector<RegionPanel> read_panel_csv(const std::filesystem::path& path);
FlowNetwork read_network_csv(const std::filesystem::path& path);
void write_panel_csv(const std::filesystem::path& path, std::span<const RegionPanel> panels);
void write_network_csv(const std::filesystem::path& path, const FlowNetwork& network);

struct CleaningResult {
  std::vector<RegionPanel> kept;
  std::vector<DroppedRegion> dropped;
};

// Fills short date gaps, enforces monotone cumulative series per policy and
// drops regions that cannot be repaired.
CleaningResult clean_panels(std::vector<RegionPanel> panels, const LoadOptions& options);

// Builds the interval grid (every interval_days-th date), derives R and S and
// the per-interval observations from cleaned panels.
AlignedDataset align_panels(std::vector<RegionPanel> cleaned, FlowNetwork network,
                            const LoadOptions& options);

AlignedDataset load_dataset(const std::filesystem::path& panel_path,
                            const std::filesystem::path& network_path, const LoadOptions& options);

// Keeps `count` regions chosen uniformly at random (original order preserved).
AlignedDataset subsample_regions(const AlignedDataset& dataset, std::size_t count,
                                 std::uint64_t seed);

// Keeps the listed regions, in the listed order. Unknown ids are an error.
AlignedDataset select_regions(const AlignedDataset& dataset, std::span<const std::string> ids);

// Daily national totals, summed over the dataset's regions.
struct NationalSeries {
  std::vector<Date> dates;
  std::vector<double> cum_cases;
  std::vector<double> cum_deaths;
  std::vector<double> cum_vaccinations;
  double population = 0.0;
};

NationalSeries national_series(const AlignedDataset& dataset);

// Uniform integer in [0, n) without the implementation-defined behavior of
// std::uniform_int_distribution.
template <class Engine>
std::uint64_t uniform_index(Engine& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace hesitancy
