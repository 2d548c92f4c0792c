#pragma once

#include <span>
#include <vector>

namespace hesitancy {

// Split potential scale reduction over chains of equal length.
double split_rhat(std::span<const std::vector<double>> chains);

// Multi-chain effective sample size from Geyer's initial monotone sequence
// of autocorrelations.
double effective_sample_size(std::span<const std::vector<double>> chains);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
};

// Shortest interval holding at least `mass` of the draws.
Interval hdi(std::span<const double> draws, double mass = 0.95);

double mean(std::span<const double> xs);

}  // namespace hesitancy
