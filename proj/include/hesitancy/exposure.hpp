#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hesitancy/data_io.hpp"

namespace hesitancy {

// Per-capita antivaccine exposure, regions x intervals, in posts per capita
// per day. Row i belongs to region_ids[i].
struct ExposureSeries {
  std::vector<std::string> region_ids;
  Eigen::MatrixXd values;
  // Regions without outgoing network weight, for which exposure is undefined.
  std::vector<std::string> excluded;

  std::size_t num_regions() const { return region_ids.size(); }
  std::size_t num_intervals() const { return static_cast<std::size_t>(values.cols()); }
};

// E_it = (1/N_i) * sum_j W_ij T_jt / sum_j W_ij, with T_jt the mean daily
// post count of source region j over interval t.
ExposureSeries compute_exposure(const AlignedDataset& dataset);

// Permutes rows uniformly at random; region labels stay in place.
ExposureSeries shuffle_exposure(const ExposureSeries& exposure, std::uint64_t seed);

// Rows for the given regions, in that order.
ExposureSeries select_exposure(const ExposureSeries& exposure, std::span<const std::string> ids);

// Throws unless rows of `exposure` match the regions and intervals of `dataset`.
void check_aligned(const AlignedDataset& dataset, const ExposureSeries& exposure);

void write_exposure_csv(const std::filesystem::path& path, const ExposureSeries& exposure);
ExposureSeries read_exposure_csv(const std::filesystem::path& path);

}  // namespace hesitancy
