#include "hesitancy/exposure.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "hesitancy/error.hpp"
#include "hesitancy/rng.hpp"

namespace hesitancy {

ExposureSeries compute_exposure(const AlignedDataset& dataset) {
  const std::size_t n_int = dataset.num_intervals();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.num_regions(); ++i) index[dataset.regions[i].region_id] = i;

  // Weighted sums per exposed region.
  std::vector<Eigen::VectorXd> numer(dataset.num_regions(), Eigen::VectorXd::Zero(n_int));
  std::vector<double> denom(dataset.num_regions(), 0.0);
  for (const auto& e : dataset.network.edges) {
    auto exposed = index.find(e.exposed_region);
    auto source = index.find(e.source_region);
    if (exposed == index.end() || source == index.end() || e.retweet_count == 0.0) continue;
    const auto& posts = dataset.regions[source->second].mean_daily_posts;
    for (std::size_t t = 0; t < n_int; ++t) numer[exposed->second][t] += e.retweet_count * posts[t];
    denom[exposed->second] += e.retweet_count;
  }

  ExposureSeries out;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < dataset.num_regions(); ++i) {
    if (denom[i] > 0.0) {
      kept.push_back(i);
    } else {
      out.excluded.push_back(dataset.regions[i].region_id);
    }
  }
  out.values.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(n_int));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& region = dataset.regions[kept[r]];
    out.region_ids.push_back(region.region_id);
    out.values.row(static_cast<Eigen::Index>(r)) =
        numer[kept[r]].transpose() / (denom[kept[r]] * region.population);
  }
  return out;
}

ExposureSeries shuffle_exposure(const ExposureSeries& exposure, std::uint64_t seed) {
  const std::size_t n = exposure.num_regions();
  if (n < 2) throw InvalidInput("shuffle_exposure needs at least two regions");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto rng = make_rng(seed, "shuffle");
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
  ExposureSeries out = exposure;
  for (std::size_t i = 0; i < n; ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = exposure.values.row(static_cast<Eigen::Index>(perm[i]));
  }
  return out;
}

ExposureSeries select_exposure(const ExposureSeries& exposure, std::span<const std::string> ids) {
  ExposureSeries out;
  out.values.resize(static_cast<Eigen::Index>(ids.size()), exposure.values.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    auto it = std::find(exposure.region_ids.begin(), exposure.region_ids.end(), ids[r]);
    if (it == exposure.region_ids.end()) throw InvalidInput("no exposure for region '" + ids[r] + "'");
    out.values.row(static_cast<Eigen::Index>(r)) =
        exposure.values.row(static_cast<Eigen::Index>(it - exposure.region_ids.begin()));
    out.region_ids.push_back(ids[r]);
  }
  return out;
}

void check_aligned(const AlignedDataset& dataset, const ExposureSeries& exposure) {
  if (exposure.num_regions() != dataset.num_regions()) {
    throw InvalidInput("exposure has " + std::to_string(exposure.num_regions()) +
                       " regions, dataset has " + std::to_string(dataset.num_regions()));
  }
  if (exposure.num_intervals() < dataset.num_intervals()) {
    throw InvalidInput("exposure covers fewer intervals than the dataset");
  }
  for (std::size_t i = 0; i < dataset.num_regions(); ++i) {
    if (exposure.region_ids[i] != dataset.regions[i].region_id) {
      throw InvalidInput("exposure row " + std::to_string(i) + " is region " + exposure.region_ids[i] +
                         ", dataset has " + dataset.regions[i].region_id);
    }
  }
}

void write_exposure_csv(const std::filesystem::path& path, const ExposureSeries& exposure) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "region_id,interval_index,exposure_per_capita_per_day\n";
  char buf[64];
  for (std::size_t i = 0; i < exposure.num_regions(); ++i) {
    for (std::size_t t = 0; t < exposure.num_intervals(); ++t) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    exposure.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
      out << exposure.region_ids[i] << ',' << t << ',' << buf << '\n';
    }
  }
}

ExposureSeries read_exposure_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact(path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("region_id,interval_index,exposure_per_capita_per_day", 0) != 0) {
    throw ParseError(path.string(), 1, "unexpected exposure.csv header");
  }
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string id, idx, val;
    if (!std::getline(ss, id, ',') || !std::getline(ss, idx, ',') || !std::getline(ss, val)) {
      throw ParseError(path.string(), lineno, "expected 3 fields");
    }
    if (ids.empty() || ids.back() != id) {
      ids.push_back(id);
      rows.emplace_back();
    }
    if (std::stoul(idx) != rows.back().size()) {
      throw ParseError(path.string(), lineno, "interval_index out of order");
    }
    rows.back().push_back(std::stod(val));
  }
  ExposureSeries out;
  out.region_ids = ids;
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ParseError(path.string(), 0, "ragged exposure rows");
    for (std::size_t t = 0; t < cols; ++t)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[i][t];
  }
  return out;
}

}  // namespace hesitancy
